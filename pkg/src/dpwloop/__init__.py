"""DPW loop-group pipeline for harmonic maps of finite uniton type."""
from .errors import *  # noqa: F401,F403
from .laurent import LaurentMatrix, RationalFn, RationalMatrix, lmul
from .liectx import (GroupContext, compact_dual, dual, lorentz, orthogonal, special_unitary,
                     willmore_context)
from .roots import cartan_data, enumerate_canonical, grading, gamma_xi_loop, exp_pi_check
from .factor import birkhoff, iwasawa, prq_split
from .dpw import (FrameField, Grid, PotentialSpec, build_frame, cartan_embed, extended_solution,
                  normalized_potential_of, solve_meromorphic_frame, validate_potential)
from .verify import (VerificationReport, extended_solution_laws, harmonicity_residual,
                     uniton_number)

__version__ = "0.1.0"
