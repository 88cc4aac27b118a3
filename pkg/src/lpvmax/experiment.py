"""Monte-Carlo identification experiments.

Each run draws fresh white input and scheduling signals, identifies a MAX
model by PLR, realizes a state-space model from it and scores both on a
validation set with the best fit rate (BFR).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, DegenerateReferenceError, MonteCarloError
from .model import BENCHMARK_K, DataSet, random_stable_model, simulate
from .plr import PlrConfig, plr_fit
from .predictor import MaxModel, predict
from .realization import (
    BENCHMARK_COL_TRIPLES,
    BENCHMARK_ROW_TRIPLES,
    HankelSpec,
    default_hankel_spec,
    realize,
)

log = logging.getLogger(__name__)

INF = float("inf")


@dataclass(frozen=True)
class ExperimentConfig:
    model_file: str | None = None
    model_seed: int = 0
    dims: tuple = (2, 2, 2, 2)
    spectral_margin: float = 0.5
    noise_gain: float = 0.3
    benchmark_k: bool = True
    n_train: int = 3000
    n_val: int = 1000
    snr_db: float = INF
    orders: tuple = (4, 2)
    plr: PlrConfig | None = None
    hankel: str | HankelSpec = "default"
    n_x: int | None = None
    n_mc: int = 10
    master_seed: int = 0
    burn_in: int = 100

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        object.__setattr__(self, "orders", tuple(self.orders))
        if self.n_mc < 1:
            raise ConfigurationError("n_mc must be >= 1")
        need = max(self.orders) + 1
        plr_burn = self.plr.burn_in if self.plr else 0
        if self.n_train <= need + plr_burn or self.n_val <= need:
            raise ConfigurationError(f"n_train and n_val must exceed the model history {need}")
        if isinstance(self.hankel, str) and self.hankel not in ("default", "benchmark"):
            raise ConfigurationError(f"unknown hankel basis {self.hankel!r}")

    @property
    def plr_config(self):
        return self.plr or PlrConfig.for_snr(self.snr_db)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if isinstance(d.get("plr"), dict):
            d["plr"] = PlrConfig(**d["plr"])
        if isinstance(d.get("hankel"), dict):
            h = d["hankel"]
            d["hankel"] = HankelSpec(
                rows=[(tuple(s), ch) for s, ch in h["rows"]],
                cols=[(tuple(s), part, ch) for s, part, ch in h["cols"]],
                n_x_target=h.get("n_x_target"),
            )
        if "snr_db" in d:
            d["snr_db"] = parse_snr(d["snr_db"])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        d = asdict(self)
        d["snr_db"] = format_snr(self.snr_db)
        if isinstance(self.hankel, HankelSpec):
            d["hankel"] = {
                "rows": [[list(s), ch] for s, ch in self.hankel.rows],
                "cols": [[list(s), part, ch] for s, part, ch in self.hankel.cols],
                "n_x_target": self.hankel.n_x_target,
            }
        return d


def parse_snr(value):
    if value is None:
        return INF
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "none"):
        return INF
    return float(value)


def format_snr(value):
    return "inf" if math.isinf(value) else f"{value:g}"


@dataclass(frozen=True, eq=False)
class Signals:
    train: DataSet
    val: DataSet
    val_noise_free: DataSet
    e_train: np.ndarray
    e_val: np.ndarray
    noise_scale: float
    snr_measured: float


@dataclass(eq=False)
class RunResult:
    run_seed: int
    bfr_sim: float
    bfr_pred: float
    bfr_sim_channels: np.ndarray
    bfr_pred_channels: np.ndarray
    report: object = field(repr=False)
    realized: object = field(repr=False)


@dataclass(eq=False)
class MonteCarloSummary:
    snr_db: float
    n_mc: int
    mean_bfr_sim: float
    std_bfr_sim: float
    mean_bfr_pred: float
    std_bfr_pred: float
    failures: int
    runs: list = field(repr=False)
    errors: list = field(repr=False, default_factory=list)

    @property
    def successes(self):
        return len(self.runs)


def load_truth(config):
    if config.model_file:
        from .io import load_model

        return load_model(config.model_file)
    model = random_stable_model(
        config.dims, config.model_seed, config.spectral_margin, noise_gain=config.noise_gain
    )
    if config.benchmark_k and model.K.shape[1:] == BENCHMARK_K.shape:
        # constant noise gain of the benchmark in place of the random one
        K = np.zeros_like(model.K)
        K[0] = BENCHMARK_K
        model = model.replace(K=K)
    return model


def run_seed_for(master_seed, index):
    """Seed of run ``index``; depends only on ``(master_seed, index)``."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def _channel_snr_db(y_signal, y_noise):
    return 10 * np.log10(y_signal.var(axis=0) / y_noise.var(axis=0))


def generate_signals(config, run_seed, model=None):
    """Training and validation data for one run.

    ``u`` is white unit-variance Gaussian, ``p`` is uniform white on
    ``[-1, 1]``, both from independent streams. The noise is scaled so that the
    per-channel output SNR (noise-free output variance over the variance of the
    noise contribution), averaged over channels in dB, equals ``snr_db`` on
    the training data. Training data discards ``burn_in`` initial samples; the
    validation data starts from rest.
    """
    model = model or load_truth(config)
    s_u, s_p, s_e = np.random.SeedSequence(run_seed).spawn(3)
    g_u, g_p, g_e = (np.random.default_rng(s) for s in (s_u, s_p, s_e))
    n_tr = config.n_train + config.burn_in
    n_tot = n_tr + config.n_val
    u = g_u.standard_normal((n_tot, model.n_u))
    p = g_p.uniform(-1.0, 1.0, (n_tot, model.n_p))
    L = np.linalg.cholesky(model.Sigma_e)
    e_unit = g_e.standard_normal((n_tot, model.n_y)) @ L.T

    tr, va = slice(0, n_tr), slice(n_tr, n_tot)
    y0_tr, _ = simulate(model, u[tr], p[tr])
    y0_va, _ = simulate(model, u[va], p[va])
    keep = slice(config.burn_in, None)

    if math.isinf(config.snr_db):
        scale, snr = 0.0, INF
        yn_tr = np.zeros_like(y0_tr)
        yn_va = np.zeros_like(y0_va)
    else:
        zero_u = np.zeros((n_tr, model.n_u))
        yn_tr, _ = simulate(model, zero_u, p[tr], e=e_unit[tr])
        yn_va, _ = simulate(model, np.zeros((config.n_val, model.n_u)), p[va], e=e_unit[va])
        signal_var = y0_tr[keep].var(axis=0)
        if np.any(signal_var <= 0):
            raise ConfigurationError("noise-free output has zero power; SNR unattainable")
        base = _channel_snr_db(y0_tr[keep], yn_tr[keep]).mean()
        scale = 10 ** ((base - config.snr_db) / 20)
        snr = float(_channel_snr_db(y0_tr[keep], scale * yn_tr[keep]).mean())

    train = DataSet(u[tr][keep], p[tr][keep], (y0_tr + scale * yn_tr)[keep])
    val = DataSet(u[va], p[va], y0_va + scale * yn_va)
    val_clean = DataSet(u[va], p[va], y0_va)
    return Signals(train, val, val_clean, scale * e_unit[tr][keep], scale * e_unit[va], scale, snr)


def bfr(y_ref, y_hat):
    """Best fit rate in percent, joint over all output channels.

    ``max(1 - mean_t |y - yhat| / mean_t |y - mean(y)|, 0) * 100`` with
    Euclidean norms across channels.
    """
    y_ref = np.asarray(y_ref, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y_ref.ndim == 1:
        y_ref = y_ref[:, None]
    if y_hat.ndim == 1:
        y_hat = y_hat[:, None]
    if y_ref.shape != y_hat.shape:
        raise ValueError(f"shape mismatch {y_ref.shape} vs {y_hat.shape}")
    if len(y_ref) < 2:
        raise ValueError("BFR needs at least two samples")
    denom = np.linalg.norm(y_ref - y_ref.mean(axis=0), axis=1).mean()
    if denom == 0:
        raise DegenerateReferenceError("reference output is constant")
    num = np.linalg.norm(y_ref - y_hat, axis=1).mean()
    return float(max(1 - num / denom, 0.0) * 100)


def bfr_channels(y_ref, y_hat):
    y_ref = np.asarray(y_ref, dtype=float).reshape(len(y_ref), -1)
    y_hat = np.asarray(y_hat, dtype=float).reshape(len(y_hat), -1)
    return np.array([bfr(y_ref[:, i], y_hat[:, i]) for i in range(y_ref.shape[1])])


def resolve_hankel(config, model):
    n_x = config.n_x or model.n_x
    if isinstance(config.hankel, HankelSpec):
        return config.hankel
    if config.hankel == "benchmark":
        return HankelSpec.from_triples(BENCHMARK_ROW_TRIPLES, BENCHMARK_COL_TRIPLES, n_x)
    return default_hankel_spec(model.n_p, model.n_u, model.n_y, config.orders, n_x_target=n_x)


def run_pipeline(config, run_seed, model=None):
    """Identify, realize and score one Monte-Carlo run."""
    model = model or load_truth(config)
    try:
        sig = generate_signals(config, run_seed, model)
        report = plr_fit(sig.train, config.orders, config.plr_config)
        realized = realize((report.model.proc, report.model.noise), resolve_hankel(config, model),
                           sigma_e=safe_covariance(report.sigma_e, model.n_y))

        y_sim, _ = simulate(realized.model, sig.val.u, sig.val.p)
        oracle = MaxModel.from_ss(model, *config.orders)
        y_oracle, res = predict(oracle, sig.val)
        y_est, _ = predict(report.model, sig.val)
        v = res.valid_from
        return RunResult(
            run_seed=run_seed,
            bfr_sim=bfr(sig.val_noise_free.y, y_sim),
            bfr_pred=bfr(y_oracle[v:], y_est[v:]),
            bfr_sim_channels=bfr_channels(sig.val_noise_free.y, y_sim),
            bfr_pred_channels=bfr_channels(y_oracle[v:], y_est[v:]),
            report=report,
            realized=realized,
        )
    except Exception as exc:
        exc.run_seed = run_seed
        raise


def safe_covariance(cov, n_y):
    """Symmetrised ``cov``, or the identity when it is not positive definite."""
    cov = (cov + cov.T) / 2
    if np.linalg.eigvalsh(cov).min() <= 0:
        return np.eye(n_y)
    return cov


_RUN_FAILURES = (ArithmeticError, np.linalg.LinAlgError, DegenerateReferenceError)


def _run_or_fail(config, seed, model):
    try:
        return run_pipeline(config, seed, model)
    except _RUN_FAILURES as exc:
        log.warning("run with seed %d failed: %s", seed, exc)
        return exc


def run_monte_carlo(config, n_jobs=1):
    """Run ``n_mc`` independent pipelines and aggregate their BFRs.

    Failed runs (diverging filters or simulations, rank loss) are counted and
    excluded from the statistics. Raises if every run fails.
    """
    model = load_truth(config)
    seeds = [run_seed_for(config.master_seed, i) for i in range(config.n_mc)]
    if n_jobs == 1:
        outcomes = [_run_or_fail(config, s, model) for s in seeds]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(_run_or_fail, [config] * len(seeds), seeds, [model] * len(seeds)))
    runs = [o for o in outcomes if isinstance(o, RunResult)]
    errors = [o for o in outcomes if not isinstance(o, RunResult)]
    if not runs:
        raise MonteCarloError(f"all {config.n_mc} runs failed; first error: {errors[0]!r}")
    sim = np.array([r.bfr_sim for r in runs])
    pred = np.array([r.bfr_pred for r in runs])
    ddof = 1 if len(runs) > 1 else 0
    return MonteCarloSummary(
        snr_db=config.snr_db,
        n_mc=config.n_mc,
        mean_bfr_sim=float(sim.mean()),
        std_bfr_sim=float(sim.std(ddof=ddof)),
        mean_bfr_pred=float(pred.mean()),
        std_bfr_pred=float(pred.std(ddof=ddof)),
        failures=len(errors),
        runs=runs,
        errors=errors,
    )


def sweep_snr(config, snr_values, n_jobs=1):
    return [run_monte_carlo(replace(config, snr_db=parse_snr(s), plr=config.plr), n_jobs) for s in snr_values]
