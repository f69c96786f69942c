from . import geometry
from . import fas_correlation
from . import finite_blocklength
from . import distributions
from . import utils
from . import bler_analytic

from .geometry import LinkBudget, link_budget, slant_ranges
from .fas_correlation import CorrelationModel, correlation_model
from .finite_blocklength import FblParams, derive_fbl
from .distributions import GammaHopModel
from .bler_analytic import average_bler, error_floor, heading_bler
