"""Multi-user space-time-block-code detection simulator and verifier."""

import json as _json

from ._stbcmud import (
    __version__,
    alamouti_encode,
    channel_correlation,
    chi_square_statistic,
    constellation_points,
    det_c_closed_form,
    effective_snr_ap,
    lemma1_residual,
    lemma2_verify,
    lemma3_roots,
    qostbc_encode,
    run_verify,
)
from ._stbcmud import run_ber as _run_ber_json
from ._stbcmud import run_outage as _run_outage_json


def run_ber(config):
    """Runs a symbol-error-rate simulation from a config dict."""
    return _json.loads(_run_ber_json(_json.dumps(config)))


def run_outage(config):
    """Runs an outage estimation from a config dict."""
    return _json.loads(_run_outage_json(_json.dumps(config)))


__all__ = [
    "__version__",
    "alamouti_encode",
    "channel_correlation",
    "chi_square_statistic",
    "constellation_points",
    "det_c_closed_form",
    "effective_snr_ap",
    "lemma1_residual",
    "lemma2_verify",
    "lemma3_roots",
    "qostbc_encode",
    "run_ber",
    "run_outage",
    "run_verify",
]
