"""Repo-wide numerical tolerances."""

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
EIG_INPUT_TOL = 1e-10
CPTP_TOL = 1e-10
DILATION_CPTP_TOL = 1e-8

JACOBI_OFFDIAG_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
MAX_DIM = 64

TSIRELSON = 2.0 * 2.0 ** 0.5
