"""Policy solvers: static allocation, static list, adjustable robust, two-stage, hindsight."""
from .ar import solve_ar_dp, solve_ar_milo
from .common import PolicyDecision
from .ph import solve_ph
from .sa import SAResult, sa_decision, solve_sa
from .sl import SLResult, sl_decision, solve_sl
from .twostage import TwoStagePlan, solve_2ssa, twossa_decision

__all__ = ["PolicyDecision", "SAResult", "SLResult", "TwoStagePlan", "sa_decision",
           "sl_decision", "solve_2ssa", "solve_ar_dp", "solve_ar_milo", "solve_ph",
           "solve_sa", "solve_sl", "twossa_decision"]
