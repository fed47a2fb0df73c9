"""Sleep staging, smoothing and closed-loop stimulation toolkit."""

from _hypnos import (  # noqa: F401
    SCHEMA_VERSION,
    HypnosError,
    SyntheticSession,
    accuracy,
    acr_update,
    bandit_sim,
    cohens_kappa,
    estimate_hmm,
    generate_session,
    sleep_macros,
    smooth,
    sol_epoch,
    stage,
    viterbi,
    __version__,
)
