//! System model: MUI power (direct form), the sequential-term objectives fed
//! to the trellis, rates and the IRS interference analysis.

mod analysis;
mod mui;
mod objectives;
mod rate;

pub use analysis::{cell_irs_system, interference_free_irs, irs_gain_decomposition, InterferenceFree};
pub use mui::{mui_power_multi, mui_power_single, mui_vectors, MuiEvaluation};
pub use objectives::{
    pmui_x_term, ppsi_mu_term, ppsi_term, px_term, IrsMode, LowOverheadXContext,
    MultiPsiContext, PsiContext, SequentialObjective, XContext,
};
pub use rate::per_user_rate;
