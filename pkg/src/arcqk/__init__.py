"""Matrix-free cubic regularization with a multishift Krylov kernel."""

from .arc import (ArcParams, ArcState, CubicModelEval, GridExhausted,
                  AllShiftsIndefinite, RatioEval, TraceRecord,
                  acceptance_ratio, advance_shift_on_failure, arcqk_minimize,
                  arcqk_minimize_gauss_newton, cubic_model_eval,
                  per_shift_tolerance, select_step)
from .bench import (ProfileCurve, SOLVERS, emit, performance_profile,
                    read_records_csv, read_records_json, run_matrix)
from .problems import (Counters, DerivativeReport, LeastSquaresProblem,
                       SmoothProblem, check_derivatives, suite_problems,
                       with_hvp)
from .records import BenchRecord
from .shifted_cg import (MultishiftSolution, MultishiftState, ShiftGrid,
                         curvature_certificate, multishift_cg)
from .shifted_cgls import CglsState, multishift_cgls
from .steihaug import TrParams, TrState, TruncatedCgResult, st_minimize, truncated_cg

__version__ = "0.1.0"
