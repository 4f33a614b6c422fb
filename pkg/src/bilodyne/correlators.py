"""Second-order moments and intensity-fluctuation correlators.

All beat-frequency algebra is done with mode/tone frequencies measured
relative to a common optical reference.  Beats are then exact float
differences of small offsets, immune to the catastrophic cancellation
that absolute optical frequencies (~1e15 rad/s) would cause at times of
order seconds.

Moment conventions, with d = fluctuation operator (a - <a>):
    normal[m, n]    = <d_m^dag d_n>      (Hermitian, real diagonal)
    anomalous[m, n] = <d_m d_n>          (symmetric)
A two-mode squeeze pair (r, phi) between modes a and b populates
normal[a, a] = normal[b, b] = sinh(r)^2 and sets
anomalous[a, b] = anomalous[b, a] = e^{i phi} cosh(r) sinh(r),
the Schmidt-basis convention of exp(xi a^dag b^dag - xi* a b)|00>.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec, TruncationInsufficient, UnknownMode, WeakLO
from .model import FieldState, Hypothesis, LocalOscillator, ModeLabel, FREQ_RTOL

# Bound saturated by pure squeezed states; allow this much numerical slack.
HEISENBERG_TOL = 1e-12

# Fock-space population allowed at the truncation edge before the
# oracle refuses to trust its own numbers.
TAIL_TOL = 1e-10


@dataclass(frozen=True)
class MomentTable:
    """Normal and anomalous second moments over a fixed mode list.

    frequencies are the absolute mode frequencies (rad/s) in the order
    the matrices are indexed.
    """

    frequencies: tuple[float, ...]
    normal: np.ndarray
    anomalous: np.ndarray

    def __post_init__(self):
        n = len(self.frequencies)
        if self.normal.shape != (n, n) or self.anomalous.shape != (n, n):
            raise InvalidSpec("moment matrices must be square over the mode list")
        self.normal.setflags(write=False)
        self.anomalous.setflags(write=False)
        if not np.allclose(self.normal, self.normal.conj().T, atol=HEISENBERG_TOL, rtol=0.0):
            raise InvalidSpec("normal moment matrix must be Hermitian")
        diag = np.diag(self.normal)
        if np.any(diag.real < -HEISENBERG_TOL) or np.any(np.abs(diag.imag) > HEISENBERG_TOL):
            raise InvalidSpec("mode populations must be real and non-negative")
        if not np.allclose(self.anomalous, self.anomalous.T, atol=HEISENBERG_TOL, rtol=0.0):
            raise InvalidSpec("anomalous moment matrix must be symmetric")
        # uncertainty bound |<d_m d_n>|^2 <= g(N_mm) g(N_nn) with
        # g(N) = sqrt(N (N + 1)); pure squeezed states saturate it.
        pop = np.clip(diag.real, 0.0, None)
        g = np.sqrt(pop * (pop + 1.0))
        bound = np.outer(g, g)
        # Saturating pure states must pass at any magnitude, so the slack
        # needs a relative part on top of the absolute floor.
        slack = bound * HEISENBERG_TOL + HEISENBERG_TOL
        if np.any(np.abs(self.anomalous) ** 2 > bound + slack):
            raise InvalidSpec("anomalous moment violates the uncertainty bound")

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    def is_zero(self) -> bool:
        return not (np.any(self.normal) or np.any(self.anomalous))


def _match_mode(freqs: tuple[float, ...], target: float) -> int:
    for k, f in enumerate(freqs):
        if math.isclose(f, target, rel_tol=FREQ_RTOL):
            return k
    raise UnknownMode(f"no mode at frequency {target!r} (rad/s) in the state")


def second_moments(state: FieldState) -> MomentTable:
    """Fluctuation moments of the prepared state (hypothesis-independent).

    Coherent and vacuum modes contribute nothing; each squeeze pair adds
    its thermal populations and anomalous entry.  Raises UnknownMode if
    a pair references a frequency absent from the mode list.
    """
    freqs = tuple(m.frequency for m in state.modes)
    n = len(freqs)
    normal = np.zeros((n, n), dtype=complex)
    anomalous = np.zeros((n, n), dtype=complex)
    if state.squeeze is not None:
        for pair in state.squeeze.pairs:
            ia = _match_mode(freqs, pair.freq_a)
            ib = _match_mode(freqs, pair.freq_b)
            ch, sh = math.cosh(pair.r), math.sinh(pair.r)
            normal[ia, ia] += sh * sh
            if ib != ia:
                normal[ib, ib] += sh * sh
            m = cmath.exp(1j * pair.phi) * ch * sh
            anomalous[ia, ib] = m
            anomalous[ib, ia] = m
    return MomentTable(frequencies=freqs, normal=normal, anomalous=anomalous)


def mode_field_index(label: ModeLabel) -> int:
    """Field-group index of a mode label under the three-field split."""
    if label is ModeLabel.IMAGE1:
        return 1
    if label is ModeLabel.IMAGE2:
        return 2
    return 0


def hypothesis_moments(state: FieldState) -> MomentTable:
    """State moments as seen by the detection model.

    Under THREE_FIELDS, modes in different field groups belong to
    statistically independent fields, so their cross moments are zeroed
    unless the state explicitly keeps cross-field correlations.
    """
    table = second_moments(state)
    if state.hypothesis is Hypothesis.ONE_FIELD or state.cross_field_correlations:
        return table
    groups = np.array([mode_field_index(m.label) for m in state.modes])
    same = groups[:, None] == groups[None, :]
    return MomentTable(
        frequencies=table.frequencies,
        normal=np.where(same, table.normal, 0.0),
        anomalous=np.where(same, table.anomalous, 0.0),
    )


def fock_oracle_moments(r: float, phi: float, n_trunc: int) -> dict:
    """Two-mode squeezed vacuum moments from truncated Fock-space evolution.

    Builds the squeeze generator xi a^dag b^dag - xi* a b on a
    (n_trunc x n_trunc)-level lattice, applies exp(G) to |0,0> and reads
    the moments off the state vector.  Completely independent of the
    closed-form expressions in second_moments, so the two can check
    each other.

    Raises TruncationInsufficient when the population at either
    truncation edge reaches 1e-10.
    """
    import scipy.sparse as sp
    from scipy.sparse.linalg import expm_multiply

    if n_trunc < 2:
        raise InvalidSpec("need at least two Fock levels per mode")
    if r < 0.0:
        raise InvalidSpec("squeeze parameter must be >= 0")
    n = n_trunc
    lower = sp.diags(np.sqrt(np.arange(1.0, n)), 1, format="csr")
    eye = sp.identity(n, format="csr")
    op_a = sp.kron(lower, eye, format="csr")
    op_b = sp.kron(eye, lower, format="csr")
    xi = r * cmath.exp(1j * phi)
    gen = xi * (op_a.conj().T @ op_b.conj().T) - xi.conjugate() * (op_a @ op_b)
    psi0 = np.zeros(n * n, dtype=complex)
    psi0[0] = 1.0
    psi = expm_multiply(gen, psi0)
    prob = np.abs(psi.reshape(n, n)) ** 2
    tail = prob[-1, :].sum() + prob[:, -1].sum() - prob[-1, -1]
    if tail >= TAIL_TOL:
        raise TruncationInsufficient(
            f"population {tail:.3e} at truncation edge {n - 1} exceeds {TAIL_TOL:g}; "
            "increase n_trunc"
        )

    def ev(op) -> complex:
        return complex(np.vdot(psi, op @ psi))

    mean_a = ev(op_a)
    mean_b = ev(op_b)
    return {
        "mean_a": mean_a,
        "mean_b": mean_b,
        "n_a": ev(op_a.conj().T @ op_a) - abs(mean_a) ** 2,
        "n_b": ev(op_b.conj().T @ op_b) - abs(mean_b) ** 2,
        "cross_normal": ev(op_a.conj().T @ op_b) - mean_a.conjugate() * mean_b,
        "anomalous_ab": ev(op_a @ op_b) - mean_a * mean_b,
        "anomalous_aa": ev(op_a @ op_a) - mean_a * mean_a,
        "anomalous_bb": ev(op_b @ op_b) - mean_b * mean_b,
        "tail_population": float(tail),
    }


# ---------------------------------------------------------------------------
# rotating-frame phasor decompositions
# ---------------------------------------------------------------------------


def reference_frequency(state: FieldState, lo: LocalOscillator) -> float:
    """Common optical reference: the signal carrier if present, else the LO centre."""
    signal = state.signal_modes()
    if signal:
        return signal[0].frequency
    return lo.carrier()


def tone_phasors(lo: LocalOscillator, ref: float) -> tuple[np.ndarray, np.ndarray]:
    """LO field as sum_p L_p e^{-i d_p t} in the frame rotating at ref.

    Returns (offsets d_p rad/s, complex amplitudes L_p).
    """
    tones = lo.tones()
    offs = np.array([w - ref for w, _ in tones])
    amps = np.array([a for _, a in tones], dtype=complex)
    return offs, amps


def mode_phasors(state: FieldState, ref: float) -> tuple[np.ndarray, np.ndarray]:
    """Mean signal field as sum_k m_k e^{-i d_k t} in the rotating frame.

    The i/sqrt(2) convention and the signal phase theta_s are folded
    into the coefficients, so the mean field is exactly
    e^{-i ref t} * sum_k m_k e^{-i d_k t}.
    """
    phase_factor = 1j / math.sqrt(2.0) * cmath.exp(1j * state.phase.theta_s)
    offs = np.array([m.frequency - ref for m in state.modes])
    amps = np.array([phase_factor * m.amplitude for m in state.modes], dtype=complex)
    return offs, amps


def phasor_sum(offsets: np.ndarray, amps: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Evaluate sum_k a_k e^{-i d_k t} over a time array, cheaply.

    Zero offsets contribute constants and opposite-sign offset pairs
    share one complex exponential via conjugation; this matters when t
    has ~1e8 entries in the emission sampler.
    """
    out = np.zeros(t.shape, dtype=complex)
    cache: dict[float, np.ndarray] = {}
    for off, amp in zip(offsets, amps):
        off = float(off)
        if amp == 0:
            continue
        if off == 0.0:
            out += amp
            continue
        if off in cache:
            phase = cache[off]
        elif -off in cache:
            phase = np.conj(cache[-off])
            cache[off] = phase
        else:
            phase = np.exp(-1j * off * t)
            cache[off] = phase
        out += amp * phase
    return out


def mean_field(state: FieldState, t) -> np.ndarray | complex:
    """Mean positive-frequency field (i/sqrt 2) sum_k alpha_k e^{-i w_k t + i theta_s}.

    Uses absolute optical frequencies; at times beyond ~1e-6 s the
    absolute phase loses float precision, so prefer the rotating-frame
    decompositions for long-time work.
    """
    offs, amps = mode_phasors(state, 0.0)
    t_arr = np.asarray(t, dtype=float)
    out = np.exp(-1j * np.multiply.outer(t_arr, offs)) @ amps
    return out if out.shape else complex(out)


def lo_field(lo: LocalOscillator, t) -> np.ndarray | complex:
    """Positive-frequency LO field sum_p L_p e^{-i w_p t} at absolute frequencies."""
    offs, amps = tone_phasors(lo, 0.0)
    t_arr = np.asarray(t, dtype=float)
    out = np.exp(-1j * np.multiply.outer(t_arr, offs)) @ amps
    return out if out.shape else complex(out)


def fluctuation_flux(table: MomentTable) -> float:
    """Photon flux carried by fluctuation populations, sum_m N_mm / 2."""
    return float(np.diag(table.normal).real.sum()) / 2.0


def require_strong_lo(state: FieldState, lo: LocalOscillator, table: MomentTable) -> None:
    """The strong-LO expansion needs E_l^2 >= 100x the total signal flux."""
    coherent = sum(abs(m.amplitude) ** 2 for m in state.modes) / 2.0
    total = coherent + fluctuation_flux(table)
    if lo.amplitude**2 < 100.0 * total:
        raise WeakLO(
            f"LO flux {lo.amplitude ** 2:g} is below 100x the signal flux {total:g}; "
            "the leading-order fluctuation expansion does not apply"
        )


def _beat_terms(
    state: FieldState,
    lo: LocalOscillator,
    table: MomentTable,
):
    """Shared phasor ingredients for lambda_ij and the line spectrum.

    Returns (tone offsets, tone amps, mode offsets, normal, anomalous,
    squeeze phase factor e^{-2 i theta_s}).
    """
    ref = reference_frequency(state, lo)
    t_offs, t_amps = tone_phasors(lo, ref)
    m_offs = np.array([f - ref for f in table.frequencies])
    sq_phase = cmath.exp(-2j * state.phase.theta_s)
    return t_offs, t_amps, m_offs, table.normal, table.anomalous, sq_phase


def lambda_ij(
    state: FieldState,
    lo: LocalOscillator,
    i: int,
    j: int,
    t: float,
    iota: float,
) -> float:
    """Leading-order intensity-fluctuation correlator of detectors i and j.

    Evaluates <: dI_i(t) dI_j(t + iota) :> in the strong-LO limit, where
    dI_i keeps only LO x fluctuation cross terms.  The result carries
    the detector sign product (-1)^(i+j) and is identically zero for
    coherent input.  Real-valued by construction.
    """
    if i not in (1, 2) or j not in (1, 2):
        raise InvalidSpec("detector indices must be 1 or 2")
    table = hypothesis_moments(state)
    require_strong_lo(state, lo, table)
    if table.is_zero():
        return 0.0
    t_offs, t_amps, m_offs, normal, anomalous, sq_phase = _beat_terms(state, lo, table)
    t2 = t + iota
    lo_t = np.exp(-1j * t_offs * t) @ t_amps
    lo_t2 = np.exp(-1j * t_offs * t2) @ t_amps
    u_t = np.exp(1j * m_offs * t)
    u_t2 = np.exp(1j * m_offs * t2)
    # <dE-(t) dE+(t2)> x E+(t) E-(t2), summed over mode pairs
    term_n = 0.5 * lo_t * np.conj(lo_t2) * (u_t @ normal @ np.conj(u_t2))
    # -<dE+(t) dE+(t2)>* x E+(t) E+(t2)
    term_a = 0.5 * sq_phase * lo_t * lo_t2 * (u_t @ anomalous.conj() @ u_t2)
    if state.phase.averaged:
        term_a = 0.0
    sign = 1.0 if i == j else -1.0
    return float(sign * 0.5 * (term_n + term_a).real)


def excess_lines(
    state: FieldState,
    lo: LocalOscillator,
    *,
    check_strong_lo: bool = True,
) -> list[tuple[float, float]]:
    """Discrete beat lines of the beyond-shot photocurrent noise.

    Returns [(angular frequency >= 0, one-sided line power)] for the
    period-averaged excess autocorrelation of the difference current,
    before detector factors: multiply each power by eta^2 |K(w)|^2 to
    get the contribution to the current PSD.

    Phase averaging wipes out the anomalous (squeeze-angle sensitive)
    contributions; the population terms survive it.
    """
    table = hypothesis_moments(state)
    if check_strong_lo:
        require_strong_lo(state, lo, table)
    if table.is_zero():
        return []
    t_offs, t_amps, m_offs, normal, anomalous, sq_phase = _beat_terms(state, lo, table)
    scale = max(1.0, float(np.max(np.abs(m_offs)) if m_offs.size else 1.0),
                float(np.max(np.abs(t_offs))))
    tol = 1e-9 * scale
    entries: list[tuple[float, complex]] = []

    n_tones = len(t_offs)
    n_modes = len(m_offs)
    for p in range(n_tones):
        for q in range(n_tones):
            for m in range(n_modes):
                for n_ in range(n_modes):
                    # population beat: (d_m - d_p) + (d_q - d_n) = 0
                    if normal[m, n_] != 0 and abs(
                        (m_offs[m] - t_offs[p]) + (t_offs[q] - m_offs[n_])
                    ) <= tol:
                        c = 0.5 * t_amps[p] * np.conj(t_amps[q]) * normal[m, n_]
                        nu = t_offs[q] - m_offs[n_]
                        entries.append((nu, c))
                        entries.append((-nu, np.conj(c)))
                    # squeeze beat: d_m + d_n = d_p + d_q
                    if (
                        not state.phase.averaged
                        and anomalous[m, n_] != 0
                        and abs((m_offs[m] - t_offs[p]) + (m_offs[n_] - t_offs[q])) <= tol
                    ):
                        c = 0.5 * sq_phase * t_amps[p] * t_amps[q] * np.conj(anomalous[m, n_])
                        nu = m_offs[n_] - t_offs[q]
                        entries.append((nu, c))
                        entries.append((-nu, np.conj(c)))
    if not entries:
        return []
    entries.sort(key=lambda e: e[0])
    clustered: list[tuple[float, complex]] = []
    for nu, c in entries:
        if clustered and abs(nu - clustered[-1][0]) <= tol:
            prev_nu, prev_c = clustered[-1]
            clustered[-1] = (prev_nu, prev_c + c)
        else:
            clustered.append((nu, c))
    # fold two-sided lines onto non-negative frequencies
    folded: dict[float, float] = {}
    for nu, c in clustered:
        if nu < -tol:
            continue
        key = 0.0 if abs(nu) <= tol else nu
        if key == 0.0:
            folded[key] = folded.get(key, 0.0) + c.real
        else:
            partner = 0.0
            for nu2, c2 in clustered:
                if abs(nu2 + key) <= tol:
                    partner = c2
                    break
            folded[key] = folded.get(key, 0.0) + (c + partner).real
    return sorted(folded.items())
