"""Fast internal consistency suite behind ``hypernoise selftest``."""
import numpy as np

from .channels import KINDS, apply_channel, controlled_kraus, kraus_bit_flip, kraus_set, verify_cptp
from .constants import CPTP_TOL
from .experiments import reduced_output
from .matcore import density, is_unitary
from .measures import negativity
from .stinespring import bitflip_dilation_paper, controlled_unitary, dilate, reduced_channel

# closed-form polarization negativities, (entangled, hyperentangled)
CLOSED_FORMS = {
    "bitflip": (lambda p: abs(1 - 2 * p) / 2, lambda p: 0.5 - p * (1 - p)),
    "depolarizing": (
        lambda p: max(0.0, 0.5 - 0.75 * p),
        lambda p: 0.5 * ((1 - 0.75 * p) ** 2 + 3 * p * p / 16),
    ),
    "phasedamping": (lambda p: np.sqrt(1 - p) / 2, lambda p: (2 - p) / 4),
}


def _random_qubit_states(n, rng):
    out = []
    for _ in range(n):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        m = a @ a.conj().T
        out.append(density(m / np.trace(m)))
    return out


def check_cptp(points=101):
    worst = 0.0
    for kind in KINDS:
        for p in np.linspace(0, 1, points):
            worst = max(worst, verify_cptp(controlled_kraus(kraus_set(kind, p))))
    return worst <= CPTP_TOL, f"max completeness deviation {worst:.2e}"


def check_closed_forms(points=101):
    worst = 0.0
    for kind, (fe, fhe) in CLOSED_FORMS.items():
        for p in np.linspace(0, 1, points):
            ne = negativity(reduced_output(kind, p, "e"), "pol1")
            nhe = negativity(reduced_output(kind, p, "he"), "pol1")
            worst = max(worst, abs(ne - fe(p)), abs(nhe - fhe(p)))
    return worst <= 1e-10, f"max closed-form deviation {worst:.2e}"


def check_dilations(points=11, states=20, seed=0):
    rng = np.random.default_rng(seed)
    rhos = _random_qubit_states(states, rng)
    worst = 0.0
    for p in np.linspace(0, 1, points):
        ref = kraus_bit_flip(p)
        for u in (bitflip_dilation_paper(p), dilate(ref), dilate(kraus_set("depolarizing", p))):
            if not is_unitary(u.mat, 1e-10) or not is_unitary(controlled_unitary(u) if u.mat.shape == (4, 4) else u.mat, 1e-10):
                return False, f"non-unitary dilation at p={p}"
            for r in rhos:
                diff = reduced_channel(u, r).mat - apply_channel(u.kraus_origin, r).mat
                worst = max(worst, float(np.max(np.abs(diff))))
    return worst <= 1e-10, f"max reduced-channel deviation {worst:.2e}"


CHECKS = {
    "cptp": check_cptp,
    "closed-forms": check_closed_forms,
    "dilation-equivalence": check_dilations,
}


def run_all():
    return [(name, *fn()) for name, fn in CHECKS.items()]
