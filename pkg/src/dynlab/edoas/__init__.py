from .base import ALGORITHMS, Edoa, EdoaConfig, get_algorithm, register_algorithm
from .algorithms import RPSO, MQSO, AmQSO, DynDE

__all__ = [
    "ALGORITHMS", "Edoa", "EdoaConfig", "get_algorithm", "register_algorithm",
    "RPSO", "MQSO", "AmQSO", "DynDE",
]
