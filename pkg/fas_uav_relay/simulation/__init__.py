from . import montecarlo

from .montecarlo import McEstimate, mc_end_to_end, mc_hop1_bler, mc_hop2_bler
