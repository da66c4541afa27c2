"""Batch experiments with newline-delimited JSON reports.

Every command writes one record per sample followed by a summary record
(``"record": "summary"``). Exit status: 0 when no contract was violated,
1 when some record violates a contract (the record is kept in the
report), 2 for invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import field_recon as fr
from .adhm_s4 import (
    AdhmDatumS4,
    check_c1_s4,
    check_c2_s4,
    integrability_residual_s4,
    moment_s4,
    stabilizer_dim_s4,
)
from .linalg_core import Tolerance
from .moment_flow import (
    FlowConfig,
    SamplerError,
    boundedness_trace,
    derive_seed,
    df_surjectivity_check,
    kempf_ness_flow_p2,
    kempf_ness_flow_s4,
    level_residual_p2,
    level_residual_s4,
    random_integrable_p2,
    random_integrable_s4,
    resolution_project,
    sample_on_level_p2,
    sample_on_level_s4,
    tangent_dimension,
)
from .monad_p2 import (
    MonadDatumP2,
    check_c1p,
    check_c2p,
    combined_identity_residual,
    integrability_residual_p2,
    max_rank_margins,
    stabilizer_dim_p2,
    surjectivity_check,
)
from .stab_limit import verify_null_homotopy

COMMANDS = ("sample", "check", "flow", "homotopy-verify", "dimension", "resolve", "field", "identities")
GEOMETRIES = ("s4", "p2")

LEVEL_TOL = 1e-8
RANK_TOL = 1e-9
HOMOTOPY_TOL = 1e-10


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    geometry: str = "s4"
    k: int = 1
    r: int = 2
    zeta: float = 0.5
    seed: int = 0
    tol: float = LEVEL_TOL
    out: str | None = None
    samples: int = 10
    input: str | None = None
    radius: float = 6.0
    mc_samples: int = 200_000

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"geometry must be one of {GEOMETRIES}, got {self.geometry!r}")
        if self.k < 1:
            raise ConfigError(f"--k must be >= 1 (got {self.k})")
        if self.r < 1:
            raise ConfigError(f"--r must be >= 1 (got {self.r})")
        if self.samples < 1:
            raise ConfigError(f"--samples must be >= 1 (got {self.samples})")
        if not 1e-12 <= self.tol < 1:
            raise ConfigError(f"--tol must lie in [1e-12, 1) (got {self.tol})")
        if self.geometry == "p2" and not abs(self.zeta) < 1:
            raise ConfigError(f"p2 runs need |zeta| < 1 (got {self.zeta})")
        if self.input is None and self.command in ("sample", "check", "flow", "homotopy-verify", "dimension", "resolve") and self.r < self.k:
            raise ConfigError(f"the sampler needs r >= k (got k={self.k}, r={self.r}); enlarge --r")
        if self.command == "resolve" and self.geometry != "p2":
            raise ConfigError("resolve is defined for --geometry p2 only")
        if self.command == "field" and self.geometry != "s4":
            raise ConfigError("field is defined for --geometry s4 only")
        if self.command == "homotopy-verify" and self.geometry == "p2" and self.zeta == 0:
            raise ConfigError("p2 homotopies need zeta != 0")
        return self


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ADHM_KIT_THREADS", "1")))
    except ValueError:
        return 1


def _flow_cfg(cfg: RunConfig) -> FlowConfig:
    return FlowConfig(tol=min(cfg.tol, 1e-10))


def _sample(cfg: RunConfig, i: int, zeta=None):
    zeta = cfg.zeta if zeta is None else zeta
    if cfg.geometry == "s4":
        return sample_on_level_s4(cfg.k, cfg.r, zeta, cfg.seed, i, _flow_cfg(cfg))
    return sample_on_level_p2(cfg.k, cfg.r, zeta, cfg.seed, i, _flow_cfg(cfg))


def _load_inputs(path):
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec.get("record") == "summary":
                continue
            obj = rec.get("datum", rec)
            zeta = rec.get("zeta", obj.get("zeta"))
            cls = MonadDatumP2 if "d" in obj else AdhmDatumS4
            out.append((cls.from_json(obj), zeta))
    return out


def _datum_json(m, zeta):
    obj = m.to_json(zeta) if isinstance(m, MonadDatumP2) else m.to_json()
    return obj


# --- per-sample tasks -------------------------------------------------------


def task_sample(cfg, i):
    m, report = _sample(cfg, i)
    res = level_residual_s4(m, cfg.zeta) if cfg.geometry == "s4" else level_residual_p2(m, cfg.zeta)
    ok = report.converged and res <= cfg.tol
    return {"index": i, "zeta": cfg.zeta, "datum": _datum_json(m, cfg.zeta), "flow": report.to_json(),
            "level_residual": res, "violation": not ok}


def _check_record(m, zeta, tol: Tolerance):
    if isinstance(m, AdhmDatumS4):
        c1, c2 = check_c1_s4(m, tol), check_c2_s4(m, tol)
        rec = {
            "c1": c1.verdict.value,
            "c2": c2.verdict.value,
            "stabilizer_dim": stabilizer_dim_s4(m, tol),
            "integrability_residual": float(np.linalg.norm(integrability_residual_s4(m))),
        }
        if zeta is not None:
            rec["level_residual"] = level_residual_s4(m, zeta)
        violation = False
        if zeta is not None and rec["level_residual"] <= LEVEL_TOL:
            # on the level set zeta > 0 forces C2, zeta < 0 forces C1, zeta != 0 freeness
            violation |= zeta > 0 and c2.fails
            violation |= zeta < 0 and c1.fails
            violation |= zeta != 0 and rec["stabilizer_dim"] != 0
        rec["violation"] = bool(violation)
        return rec
    c1, c2 = check_c1p(m, tol), check_c2p(m, tol)
    margins = max_rank_margins(m)
    rec = {
        "surjectivity": surjectivity_check(m, tol).verdict.value,
        "c1p": c1.verdict.value,
        "c2p": c2.verdict.value,
        "stabilizer_dim": stabilizer_dim_p2(m, tol),
        "max_rank_margins": list(margins),
        "integrability_residual": float(np.linalg.norm(integrability_residual_p2(m))),
    }
    violation = False
    if zeta is not None:
        rec["level_residual"] = level_residual_p2(m, zeta)
        if rec["level_residual"] <= LEVEL_TOL and abs(zeta) < 1:
            violation |= zeta > 0 and c1.fails
            violation |= zeta < 0 and c2.fails
            violation |= min(margins) <= 1e-6
            violation |= not float(zeta).is_integer() and rec["stabilizer_dim"] != 0
    rec["violation"] = bool(violation)
    return rec


def task_check(cfg, i, item=None):
    if item is None:
        m, _ = _sample(cfg, i)
        zeta = cfg.zeta
    else:
        m, zeta = item
    rec = {"index": i, "zeta": zeta, "k": m.k, "r": m.r}
    rec.update(_check_record(m, zeta, Tolerance(rel=RANK_TOL)))
    if item is not None and zeta is not None:
        # round trip: a re-read sample must still sit on its level set
        rec["violation"] |= rec["level_residual"] > LEVEL_TOL
    return rec


def task_flow(cfg, i):
    rng = derive_seed(cfg.seed, i)
    if cfg.geometry == "s4":
        m0 = random_integrable_s4(cfg.k, cfg.r, rng, generic_c=True)
        m, report = kempf_ness_flow_s4(m0, cfg.zeta, _flow_cfg(cfg))
        bound = 1e-9 * (1 + m0.norm() ** 3)
    else:
        m0 = random_integrable_p2(cfg.k, cfg.r, rng, generic_c=True)
        m, report = kempf_ness_flow_p2(m0, cfg.zeta, _flow_cfg(cfg))
        bound = 1e-9 * (1 + m0.norm() ** 3)
    bad = report.integrability_residual > bound or (report.converged and report.final_residual > _flow_cfg(cfg).tol)
    return {"index": i, "flow": report.to_json(), "violation": bool(bad)}


def task_homotopy(cfg, i):
    m, _ = sample_on_level_s4(cfg.k, cfg.r, cfg.zeta, cfg.seed, i, FlowConfig(tol=1e-12)) if cfg.geometry == "s4" \
        else sample_on_level_p2(cfg.k, cfg.r, cfg.zeta, cfg.seed, i, FlowConfig(tol=1e-12))
    grid = np.linspace(0.0, 1.0, 11)
    rep = verify_null_homotopy(m, cfg.geometry, grid, cfg.zeta)
    bad = (
        rep["max_level_residual"] > rep["residual_bound"]
        or rep["max_integrability_residual"] > HOMOTOPY_TOL
        or rep["endpoint_constancy"] > 1e-12
        or bool(rep["regularity_failures"])
        or not rep["start_is_embedding"]
    )
    rep.update({"index": i, "violation": bool(bad)})
    return rep


def task_dimension(cfg, i):
    m, _ = _sample(cfg, i)
    dim = tangent_dimension(m, cfg.zeta)
    rec = {"index": i, "tangent_dimension": dim, "expected": 4 * cfg.k * cfg.r}
    bad = dim != 4 * cfg.k * cfg.r
    if cfg.geometry == "p2":
        rec["df_surjective"] = df_surjectivity_check(m).verdict.value
        bad |= rec["df_surjective"] != "Holds"
    rec["violation"] = bool(bad)
    return rec


def task_resolve(cfg, i):
    m, _ = _sample(cfg, i)
    trace = boundedness_trace(m, cfg.zeta)
    res = resolution_project(m, cfg.zeta, FlowConfig(tol=1e-10, max_iter=20000))
    rec = {"index": i, "boundedness": trace}
    rec.update(res.to_json())
    bad = abs(trace["sum_rule_mu0"]) > 1e-8 or abs(trace["sum_rule_mu1"]) > 1e-8
    if not res.boundary:
        bad |= res.c1p_in != res.c1p_out or res.c2p_in != res.c2p_out
    rec["violation"] = bool(bad)
    return rec


def task_identities(cfg, i):
    rng = derive_seed(cfg.seed, i)
    if cfg.geometry == "p2":
        k, r = cfg.k, cfg.r
        g = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)  # noqa: E731
        m = MonadDatumP2(g(k, k), g(k, k), g(k, k), g(k, r), g(r, k))
        res = combined_identity_residual(m)
        bound = 1e-11 * (1 + m.norm() ** 4)
        rec = {"index": i, "combined_identity_residual": res, "bound": bound}
        bad = res > bound
        if cfg.r >= cfg.k:
            s, _ = _sample(cfg, i)
            trace = boundedness_trace(s, cfg.zeta)
            rec["sum_rule_mu0"] = trace["sum_rule_mu0"]
            rec["sum_rule_mu1"] = trace["sum_rule_mu1"]
            bad |= abs(trace["sum_rule_mu0"]) > 1e-8 or abs(trace["sum_rule_mu1"]) > 1e-8
    else:
        m = random_integrable_s4(cfg.k, max(cfg.r, cfg.k), rng, generic_c=True)
        lhs = float(np.trace(moment_s4(m)).real)
        rhs = float(np.linalg.norm(m.b) ** 2 - np.linalg.norm(m.c) ** 2)
        rec = {"index": i, "trace_identity_residual": abs(lhs - rhs)}
        bad = abs(lhs - rhs) > 1e-11 * (1 + m.norm() ** 2)
    rec["violation"] = bool(bad)
    return rec


def run_field(cfg):
    if (cfg.k, cfg.r) == (1, 2):
        m, name = fr.one_instanton(), "one_instanton"
    elif (cfg.k, cfg.r) == (2, 4):
        m, name = fr.two_instanton(), "two_instanton"
    else:
        m, _ = sample_on_level_s4(cfg.k, cfg.r, 0.0, cfg.seed, 0, FlowConfig(tol=1e-12))
        name = "flowed_random"
    rng = np.random.default_rng(cfg.seed)
    pts = rng.uniform(-1, 1, (cfg.samples, 4))
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True) * 3.0 * rng.random((cfg.samples, 1)) ** 0.25
    records = []
    for i, x in enumerate(pts):
        fp = fr.gauge_field_at(m, x, 1e-3, check=(i == 0))
        records.append({"index": i, "x": x.tolist(), "asd_residual": fr.asd_residual(fp)})
    rep = fr.charge_integral(m, cfg.radius, cfg.mc_samples, cfg.seed)
    asd_max = max(r["asd_residual"] for r in records)
    tol = max(0.02 * m.k, 4 * rep.stderr)
    summary_extra = {
        "datum": name,
        "charge": rep.charge,
        "stderr": rep.stderr,
        "asd_max": asd_max,
        "asd_exact_max": rep.asd_max,
        "radius": rep.radius,
        "samples": rep.samples,
        "h": 1e-3,
    }
    bad = abs(rep.charge - m.k) > tol or asd_max > 1e-3
    for r in records:
        r["violation"] = r["asd_residual"] > 1e-3
    return records, summary_extra, bad


TASKS = {
    "sample": task_sample,
    "check": task_check,
    "flow": task_flow,
    "homotopy-verify": task_homotopy,
    "dimension": task_dimension,
    "resolve": task_resolve,
    "identities": task_identities,
}


def _summarise(cfg, records):
    summary = {"record": "summary", "command": cfg.command, "geometry": cfg.geometry, "k": cfg.k, "r": cfg.r,
               "zeta": cfg.zeta, "seed": cfg.seed, "samples": len(records),
               "violations": sum(bool(r.get("violation")) for r in records)}
    if cfg.input is not None:
        # shapes come from the re-read data, not from --k/--r
        summary.update(k=None, r=None, input=str(cfg.input),
                       shapes=sorted({(r["k"], r["r"]) for r in records if "k" in r}))
    if cfg.command == "check":
        keys = ("c1p", "c2p") if cfg.geometry == "p2" else ("c1", "c2")
        for key in keys:
            for verdict in ("Fails", "Unknown"):
                summary[f"{key}_{verdict.lower()}"] = sum(r.get(key) == verdict for r in records)
    if cfg.command == "homotopy-verify":
        summary["max_level_residual"] = max(r["max_level_residual"] for r in records)
        summary["max_integrability_residual"] = max(r["max_integrability_residual"] for r in records)
        summary["max_endpoint_constancy"] = max(r["endpoint_constancy"] for r in records)
    if cfg.command == "dimension":
        summary["dimensions"] = sorted({r["tangent_dimension"] for r in records})
    return summary


def run(cfg: RunConfig, stream=None) -> int:
    """Execute ``cfg`` and write NDJSON to ``cfg.out`` (or ``stream``)."""
    cfg.validate()
    if cfg.command == "field":
        records, extra, bad = run_field(cfg)
        summary = _summarise(cfg, records)
        summary.update(extra)
        summary["violations"] += int(bad)
    else:
        task = TASKS[cfg.command]
        if cfg.input is not None:
            if cfg.command != "check":
                raise ConfigError("--input is supported by the check command only")
            items = _load_inputs(cfg.input)
            jobs = [(lambda i=i, it=it: task_check(cfg, i, it)) for i, it in enumerate(items)]
        else:
            jobs = [(lambda i=i: task(cfg, i)) for i in range(cfg.samples)]
        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            records = list(pool.map(lambda job: job(), jobs))
        summary = _summarise(cfg, records)
    lines = [json.dumps(r, sort_keys=True) for r in records] + [json.dumps(summary, sort_keys=True)]
    text = "\n".join(lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    (stream or sys.stdout).write(json.dumps(summary, sort_keys=True) + "\n")
    return 1 if summary["violations"] else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adhm-kit", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--geometry", choices=GEOMETRIES, default="s4")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--zeta", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=LEVEL_TOL)
    p.add_argument("--out", default=None, help="NDJSON report path (default: summary to stdout only)")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--input", default=None, help="NDJSON data to re-check (check command)")
    p.add_argument("--radius", type=float, default=6.0)
    p.add_argument("--mc-samples", type=int, default=200_000)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=args.command, geometry=args.geometry, k=args.k, r=args.r, zeta=args.zeta, seed=args.seed,
        tol=args.tol, out=args.out, samples=args.samples, input=args.input, radius=args.radius,
        mc_samples=args.mc_samples,
    )
    try:
        return run(cfg)
    except (ConfigError, SamplerError) as exc:
        print(f"adhm-kit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
