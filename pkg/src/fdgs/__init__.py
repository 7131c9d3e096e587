"""Lattice-based fully dynamic group signatures with deniability (toy parameters)."""

from .errors import FdgsError
from .lattice import PROFILES, Params, Rng, get_profile
from .scheme import (
    Bottom,
    GroupInfo,
    GroupPublicKey,
    GroupSigningKey,
    PublicParams,
    Signature,
    d_judge,
    d_trace,
    g_setup,
    g_update,
    gkgen,
    is_active,
    join,
    judge,
    revoke_uids,
    sign,
    trace,
    ukgen,
    verify,
)

__all__ = [
    "Bottom", "FdgsError", "GroupInfo", "GroupPublicKey", "GroupSigningKey", "PROFILES", "Params",
    "PublicParams", "Rng", "Signature", "d_judge", "d_trace", "g_setup", "g_update", "get_profile",
    "gkgen", "is_active", "join", "judge", "revoke_uids", "sign", "trace", "ukgen", "verify",
]
__version__ = "0.1.0"
