from .base import BOTTOM, INF, NEG_INF, VarSetMismatchError
from .poset import (CANONICAL_ORDER, DomainId, DomainPoset, IMPLEMENTED,
                    PosetError, UnknownDomainError, default_poset,
                    domain_from_token, parse_poset)
from .api import (UnimplementedDomainError, backward_transfer, comparable,
                  get_domain, join, leq, meet, narrow, reduce_state, transfer,
                  widen)

__all__ = [
    "BOTTOM", "CANONICAL_ORDER", "DomainId", "DomainPoset", "IMPLEMENTED",
    "INF", "NEG_INF", "PosetError", "UnimplementedDomainError",
    "UnknownDomainError", "VarSetMismatchError", "backward_transfer",
    "comparable", "default_poset", "domain_from_token", "get_domain", "join",
    "leq", "meet", "narrow", "parse_poset", "reduce_state", "transfer",
    "widen",
]
