"""PAR10 scoring and its normalized variant."""

from __future__ import annotations

from .errors import DegenerateGap

PENALTY = 10.0


def par10(runtime: float, status, cutoff: float) -> float:
    """Runtime if the run succeeded within the cutoff, else ``10 * cutoff``.

    Any status other than ``ok`` counts as unsolved, as does an ``ok`` run
    reported above the cutoff.
    """
    status = getattr(status, "value", status)
    if status == "ok" and runtime <= cutoff:
        return float(runtime)
    return PENALTY * cutoff


def npar10(score: float, oracle_score: float, sbs_score: float) -> float:
    gap = sbs_score - oracle_score
    if gap == 0:
        raise DegenerateGap(
            f"oracle and SBS both score {oracle_score!r}; nPAR10 is undefined"
        )
    return (score - oracle_score) / gap
