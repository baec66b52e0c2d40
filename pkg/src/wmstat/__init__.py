"""Statistical watermarking as hypothesis testing with coupled regions."""

from .dist import DiscreteDist, binary_entropy, binom_exact, entropy, inv_binary_entropy, tv_distance
from .ump import Coupling, Region, optimal_type2, type1_exact, type2_exact, ump_coupling

__all__ = [
    "DiscreteDist",
    "Coupling",
    "Region",
    "entropy",
    "binary_entropy",
    "inv_binary_entropy",
    "tv_distance",
    "binom_exact",
    "ump_coupling",
    "optimal_type2",
    "type1_exact",
    "type2_exact",
]
