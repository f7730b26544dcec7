"""Acceptance gate: one test per release criterion, each printing a verdict line.

Every test checks a quantitative claim at a pinned tolerance and prints a
single ``criterion NN: PASS/FAIL`` line (visible with ``pytest -s`` or in the
captured output of a failing run).  Timed criteria also enforce their runtime
budgets.  Run with ``pytest tests/test_acceptance.py -v``.
"""

import json
import math
import os
import time

import numpy as np
import pytest

from qtherm.channel import (
    GROUND,
    ThermalQubitChannel,
    apply_superoperator,
    channel_superoperator,
    discrimination_distance,
    discrimination_with_ancilla,
    lindblad_rhs,
    optimize_discrimination,
)
from qtherm.chains import ChainModel
from qtherm.cli import main as cli_main
from qtherm.estimation import (
    UnitaryFamily,
    heat_capacity,
    qfi_fidelity_limit,
    qfi_unitary,
    thermal_qfi,
)
from qtherm.lqts import (
    LqtsCalculator,
    local_qfi_temperature,
    lqts_closed_form,
    lqts_fidelity_oracle,
    lqts_scaling,
    lqts_sweep,
)
from qtherm.protocols import (
    MeasurementModel,
    ToyModelConfig,
    fisher_iid,
    fisher_input_extremes,
    fisher_sequential,
    optimal_gap_oracle,
    optimal_probe_spectrum,
    toy_scaling_exponent,
)
from qtherm.states import BipartitionSpec, DensityMatrix

POVM = MeasurementModel.sigma_z_projectors()


def report(num, ok, detail):
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {num}: {detail}"


# -----------------------------------------------------------------------------

def test_criterion_01_lqts_closed_form_vs_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for h_field in (0.5, 1.0, 1.5):
        model = ChainModel("ising", 6, h_field)
        ham = model.hamiltonian()
        terms = model.terms()
        for beta in (1.0, 3.0, 9.0):
            calc = LqtsCalculator(ham, beta, terms=terms)
            for n_a in range(1, 7):
                part = BipartitionSpec.chain_block(6, n_a)
                s_closed = calc.block(part).s_A
                s_oracle = lqts_fidelity_oracle(ham, beta, part)
                rel = abs(s_closed - s_oracle) / max(abs(s_oracle), 1e-300)
                worst = max(worst, rel)
    elapsed = time.perf_counter() - t0
    report(1, worst <= 1e-5 and elapsed < 60.0,
           f"worst rel diff {worst:.2e} (tol 1e-5), runtime {elapsed:.1f}s (< 60s)")


def test_criterion_02_xxz_single_site_vanishes():
    worst = 0.0
    for delta in np.arange(-1.5, 1.5 + 1e-9, 0.25):
        model = ChainModel("xxz", 8, float(delta))
        res = lqts_closed_form(model.hamiltonian(), 6.0, BipartitionSpec.chain_block(8, 1),
                               terms=model.terms())
        worst = max(worst, abs(res.s_A))
    report(2, worst <= 1e-10, f"max |s_A| {worst:.2e} over 13 Delta values (tol 1e-10)")


def test_criterion_03_monotonicity_positivity_complementarity():
    models = [ChainModel("ising", 6, h) for h in (0.6, 1.0, 1.4)]
    models += [ChainModel("xxz", 6, d) for d in (-1.0, 0.5)]
    rows = lqts_sweep(models, 3.0, tuple(range(1, 7)))
    by_model = {}
    for r in rows:
        by_model.setdefault((r.model, r.param), []).append(r)
    mono = positive = comp = True
    worst_comp = 0.0
    for group in by_model.values():
        group.sort(key=lambda r: r.n_A)
        vals = [r.s_A for r in group]
        mono &= all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        positive &= all(r.s_a >= 0.0 and r.s_A >= -1e-12 for r in group)
        for r in group:
            rel = abs(r.s_A + r.s_a - r.variance_H) / r.variance_H
            worst_comp = max(worst_comp, rel)
    comp = worst_comp <= 1e-8
    report(3, mono and positive and comp,
           f"monotone={mono}, s_a>=0={positive}, complementarity rel {worst_comp:.2e} (tol 1e-8)")


def test_criterion_04_global_limit_heat_capacity():
    model = ChainModel("ising", 5, 1.1)
    ham = model.hamiltonian()
    beta = 2.0
    temp = 1.0 / beta
    res = lqts_closed_form(ham, beta, BipartitionSpec.chain_block(5, 5), terms=model.terms())
    q_a = local_qfi_temperature(res, temp)
    q = thermal_qfi(ham, temp)
    cv = heat_capacity(ham, temp)
    rel1 = abs(q_a - q) / q
    rel2 = abs(q - cv / temp**2) / q
    report(4, rel1 <= 1e-8 and rel2 <= 1e-8,
           f"|Q_A-Q|/Q {rel1:.2e}, |Q-c_v/T^2|/Q {rel2:.2e} (tol 1e-8)")


def test_criterion_05_scaling_exponents():
    t0 = time.perf_counter()
    ising = lqts_scaling("ising", [6, 8, 10]).exponent
    xxz = lqts_scaling("xxz", [6, 8]).exponent
    elapsed = time.perf_counter() - t0
    report(5, abs(ising - 2.0) <= 0.3 and abs(xxz - 3.0) <= 0.5 and elapsed < 900.0,
           f"ising slope {ising:.3f} (2±0.3), xxz slope {xxz:.3f} (3±0.5), "
           f"runtime {elapsed:.0f}s (< 900s)")


def test_criterion_06_lindblad_channel():
    t_grid = (0.1, 0.5, 1.0, 2.0, 5.0)
    nth_grid = (0.05, 0.3, 1.0, 3.0)
    worst_fix = worst_semi = worst_choi = 0.0
    trace_ok = True
    for n_th in nth_grid:
        ch = ThermalQubitChannel(omega=1.0, gamma=1.0, n_th=n_th)
        # Boltzmann weights written out directly, independent of the package's
        # Gibbs machinery: basis index 0 is the excited level at +omega/2
        beta = 1.0 / ch.temperature
        w = np.array([math.exp(-beta * ch.omega / 2.0), math.exp(beta * ch.omega / 2.0)])
        gibbs = np.diag(w / w.sum()).astype(complex)
        worst_fix = max(worst_fix, float(np.max(np.abs(
            ch.equilibrium_state().entries - gibbs))))
        for t in t_grid:
            s = channel_superoperator(ch, t)
            worst_fix = max(worst_fix, float(np.max(np.abs(
                apply_superoperator(s, gibbs) - gibbs))))
            s_half = channel_superoperator(ch, 0.5 * t)
            worst_semi = max(worst_semi, float(np.max(np.abs(s_half @ s_half - s))))
            choi = s.reshape(2, 2, 2, 2).transpose(2, 0, 3, 1).reshape(4, 4)
            worst_choi = max(worst_choi, max(0.0, -float(np.linalg.eigvalsh(choi).min())))
            tr_map = np.einsum("iiab->ab", s.reshape(2, 2, 2, 2))
            trace_ok &= bool(np.allclose(tr_map, np.eye(2), atol=1e-12))
    # analytic channel vs a 4th-order Runge-Kutta integration of the master equation
    ch = ThermalQubitChannel(omega=1.0, gamma=1.0, n_th=0.3)
    rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]], dtype=complex)
    t_final, n_steps = 2.0, 4000
    dt = t_final / n_steps
    y = rho.copy()
    for _ in range(n_steps):
        k1 = lindblad_rhs(ch, y)
        k2 = lindblad_rhs(ch, y + 0.5 * dt * k1)
        k3 = lindblad_rhs(ch, y + 0.5 * dt * k2)
        k4 = lindblad_rhs(ch, y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    analytic = apply_superoperator(channel_superoperator(ch, t_final), rho)
    ode_err = float(np.max(np.abs(analytic - y)))
    report(6, worst_fix <= 1e-10 and worst_semi <= 1e-10 and worst_choi <= 1e-10
           and trace_ok and ode_err <= 1e-6,
           f"fixed point {worst_fix:.1e} (1e-10), semigroup {worst_semi:.1e}, "
           f"Choi neg {worst_choi:.1e}, TP {trace_ok}, ODE err {ode_err:.1e} (1e-6)")


def _grid_channels():
    return [ThermalQubitChannel.from_temperature(1.0, 1.0, float(t))
            for t in np.linspace(0.4, 2.0, 9)]


def test_criterion_07_protocol_ordering_at_tau_4():
    tau = 4.0
    ok_worst = ok_opt = ok_ground = True
    for k, ch in enumerate(_grid_channels()):
        iid = fisher_input_extremes(ch, tau, POVM, 7, "iid",
                                    n_angles=61, n_samples=10, seed=k)
        sms = fisher_input_extremes(ch, tau, POVM, 7, "sequential",
                                    n_angles=61, n_samples=10, seed=k)
        ok_worst &= sms.minimum > iid.minimum
        ok_opt &= iid.maximum >= sms.maximum - 1e-12 * iid.maximum
        ok_ground &= iid.argmax_is_ground
    report(7, ok_worst and ok_opt and ok_ground,
           f"F_sms(worst)>F_iid(worst)={ok_worst}, F_iid(opt)>=F_sms(opt)={ok_opt}, "
           f"ground optimal={ok_ground} on 9 temperatures")


def test_criterion_08_gap_ratio_decreasing():
    t0 = time.perf_counter()
    ch = ThermalQubitChannel(omega=1.0, gamma=1.0, n_th=0.3)
    ratios = []
    for n in range(2, 8):
        gi = fisher_input_extremes(ch, 4.0, POVM, n, "iid",
                                   n_angles=61, n_samples=10, seed=1).gap
        gs = fisher_input_extremes(ch, 4.0, POVM, n, "sequential",
                                   n_angles=61, n_samples=10, seed=1).gap
        ratios.append(gs / gi)
    elapsed = time.perf_counter() - t0
    sub_unity = all(r < 1.0 for r in ratios)
    decreasing = all(b < a for a, b in zip(ratios, ratios[1:]))
    report(8, sub_unity and decreasing and elapsed < 300.0,
           f"ratios {[f'{r:.3f}' for r in ratios]} all<1={sub_unity}, "
           f"strictly decreasing={decreasing}, runtime {elapsed:.0f}s (< 300s)")


def test_criterion_09_thermalization_collapse():
    ch = ThermalQubitChannel(omega=1.0, gamma=1.0, n_th=0.3)
    rho0 = GROUND.to_density()
    worst = 0.0
    for n in (3, 7):
        f_iid = fisher_iid(rho0, ch, 12.0, POVM, n).value
        f_sms = fisher_sequential(rho0, ch, 12.0, POVM, n).value
        worst = max(worst, abs(f_sms - f_iid) / f_iid)
    report(9, worst <= 1e-3, f"max |F_sms - N F|/(N F) {worst:.2e} (tol 1e-3)")


def test_criterion_10_unitary_family_qfi():
    from qtherm.states import HermitianOperator, PureState

    rng = np.random.default_rng(42)

    def random_hermitian(dim, r):
        a = r.normal(size=(dim, dim)) + 1j * r.normal(size=(dim, dim))
        return HermitianOperator((a + a.conj().T) / 2.0)

    # pure base state: QFI = 4 Var(H)
    gen = random_hermitian(5, rng)
    vec = rng.normal(size=5) + 1j * rng.normal(size=5)
    psi = PureState(vec / np.linalg.norm(vec))
    q_pure = qfi_unitary(UnitaryFamily(gen, DensityMatrix.from_pure(psi)))
    amp = psi.amplitudes
    mean = float(np.real(amp.conj() @ gen.entries @ amp))
    second = float(np.real(amp.conj() @ gen.entries @ gen.entries @ amp))
    var = second - mean**2
    rel_pure = abs(q_pure - 4.0 * var) / (4.0 * var)

    # equal superposition of extremal eigenvectors: QFI = (h_max - h_min)^2
    vals, vecs = np.linalg.eigh(gen.entries)
    sup = (vecs[:, 0] + vecs[:, -1]) / math.sqrt(2.0)
    q_sup = qfi_unitary(UnitaryFamily(gen, DensityMatrix.from_pure(PureState(sup))))
    span = (vals[-1] - vals[0]) ** 2
    rel_sup = abs(q_sup - span) / span

    # mixed base states against the fidelity-limit oracle
    worst_mixed = 0.0
    for seed in range(50):
        r = np.random.default_rng(seed)
        dim = int(r.integers(2, 6))
        gen_s = random_hermitian(dim, r)
        raw = r.normal(size=(dim, dim)) + 1j * r.normal(size=(dim, dim))
        rho = raw @ raw.conj().T
        rho = DensityMatrix(rho / np.trace(rho).real)
        q_formula = qfi_unitary(UnitaryFamily(gen_s, rho))
        hvals, hvecs = np.linalg.eigh(gen_s.entries)

        def state_at(lam, hvals=hvals, hvecs=hvecs, rho=rho):
            u = hvecs @ np.diag(np.exp(-1j * lam * hvals)) @ hvecs.conj().T
            return DensityMatrix(u @ rho.entries @ u.conj().T)

        q_oracle = qfi_fidelity_limit(state_at, 0.0, delta=1e-3)
        worst_mixed = max(worst_mixed, abs(q_formula - q_oracle) / max(q_oracle, 1e-300))

    report(10, rel_pure <= 1e-9 and rel_sup <= 1e-9 and worst_mixed <= 1e-5,
           f"pure 4Var rel {rel_pure:.1e} (1e-9), extremal rel {rel_sup:.1e} (1e-9), "
           f"mixed vs oracle worst {worst_mixed:.1e} over 50 seeds (1e-5)")


def test_criterion_11_optimal_probe_degeneracy():
    worst_spread = worst_gap = 0.0
    for m in (2, 3, 4, 5):
        sp = optimal_probe_spectrum(m, 1.0)
        worst_spread = max(worst_spread, sp.excited_degeneracy_spread() / sp.gap)
        worst_gap = max(worst_gap, abs(sp.gap - optimal_gap_oracle(m, 1.0)))
    report(11, worst_spread <= 1e-6 and worst_gap <= 1e-6,
           f"degeneracy spread/gap {worst_spread:.1e} (1e-6), "
           f"|gap - oracle| {worst_gap:.1e} (1e-6)")


def test_criterion_12_heisenberg_toy_exponents():
    t0 = time.perf_counter()
    base = ToyModelConfig(n_shots=10_000, seed=7)
    s_noon, _ = toy_scaling_exponent([2, 4, 8, 16], base, "noon")
    s_prod, _ = toy_scaling_exponent([2, 4, 8, 16], base, "product")
    elapsed = time.perf_counter() - t0
    report(12, abs(s_noon + 1.0) <= 0.15 and abs(s_prod + 0.5) <= 0.15 and elapsed < 120.0,
           f"noon {s_noon:.3f} (-1±0.15), product {s_prod:.3f} (-0.5±0.15), "
           f"runtime {elapsed:.0f}s (< 120s)")


def test_criterion_13_discrimination_structure():
    t_hot, t_cold, omega, gamma = 2.0, 1.0, 1.0, 1.0
    t_grid = np.linspace(0.02, 6.0, 80)
    single = [discrimination_distance(t_hot, t_cold, GROUND, float(t), omega, gamma)
              for t in t_grid]
    ancilla = [discrimination_with_ancilla(t_hot, t_cold, float(t), omega, gamma)
               for t in t_grid]
    anc_ok = all(a >= s - 1e-12 for a, s in zip(ancilla, single))
    short = optimize_discrimination(t_hot, t_cold, omega, gamma, np.linspace(0.02, 0.3, 15))
    ground_ok = short.r0_star.r[2] <= GROUND.r[2] + 1e-9
    i_max = int(np.argmax(single))
    overshoot = single[i_max] > 1.0 and 0 < i_max < len(single) - 1
    relaxes = abs(single[-1] - 1.0) < 0.05 and single[i_max] - single[-1] > 1e-3
    report(13, anc_ok and ground_ok and overshoot and relaxes,
           f"ancilla>=single={anc_ok}, short-time optimum ground={ground_ok}, "
           f"max {single[i_max]:.3f}>1 at interior time={overshoot}, relaxes to 1={relaxes}")


CLI_CONFIGS = {
    "lqts-sweep": """experiment = lqts-sweep
model = ising
n_sites = 4
beta = 2.0
param_min = 0.8
param_max = 1.2
param_step = 0.2
seed = 7
""",
    "lqts-scaling": """experiment = lqts-scaling
model = ising
l_values = 4,6
seed = 7
""",
    "discriminate": """experiment = discriminate
t_hot = 2.0
t_cold = 1.0
n_times = 8
seed = 7
""",
    "fisher-compare": """experiment = fisher-compare
n_steps = 2
n_temperatures = 3
n_samples = 8
seed = 7
""",
    "optimal-probe": """experiment = optimal-probe
m_levels = 2,3
seed = 7
""",
    "heisenberg-toy": """experiment = heisenberg-toy
n_probe_values = 2,4
modes = product
n_shots = 500
seed = 7
""",
}


def test_criterion_14_cli_determinism(tmp_path):
    mismatched = []
    for name, cfg_text in CLI_CONFIGS.items():
        cfg = tmp_path / f"{name}.cfg"
        cfg.write_text(cfg_text)
        outs = []
        for run in ("a", "b"):
            out_dir = tmp_path / f"{name}-{run}"
            rc = cli_main([name, "--config", str(cfg), "--output", str(out_dir)])
            assert rc == 0, f"{name} exited {rc}"
            csvs = sorted(p for p in os.listdir(out_dir) if p.endswith(".csv"))
            outs.append(b"".join(open(os.path.join(out_dir, p), "rb").read() for p in csvs))
        if outs[0] != outs[1]:
            mismatched.append(name)
    report(14, not mismatched,
           f"byte-identical CSV reruns for all {len(CLI_CONFIGS)} experiments"
           + (f"; mismatched: {mismatched}" if mismatched else ""))


def test_criterion_15_plotkit_reference_figures(tmp_path):
    plotkit = pytest.importorskip("plotkit")
    ref_dir = os.path.join(os.path.dirname(plotkit.__file__), "reference")
    kinds = ["lqts-curves", "lqts-scaling", "fi-panels", "gap-ratio", "discrimination"]
    rendered = []
    for kind in kinds:
        recipe = os.path.join(ref_dir, f"{kind}.json")
        out = plotkit.render_recipe(recipe, output_dir=str(tmp_path))
        assert os.path.getsize(out) > 0
        rendered.append(kind)
    # the gap-ratio reference data must show a monotone decreasing sub-unity curve
    ratios = plotkit.load_gap_ratio_curve(os.path.join(ref_dir, "gap-ratio.json"))
    sub_unity = all(r < 1.0 for r in ratios)
    decreasing = all(b < a for a, b in zip(ratios, ratios[1:]))
    report(15, len(rendered) == 5 and sub_unity and decreasing,
           f"rendered {len(rendered)}/5 figure kinds; gap-ratio sub-unity={sub_unity}, "
           f"decreasing={decreasing}")
