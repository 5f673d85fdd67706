"""Command-line driver: verification suite, cohomology tables and Serre pairings.

Usage::

    qkahler verify [--q 4/5] [--lmax 3] [--bundles=-5..5] [--mode exact|approx] ...
    qkahler cohomology --format json --out table.json
    qkahler serre --bundles=-4..4

Exit codes: 0 when every check passes, 1 when a check fails, 2 for a bad configuration.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import __version__
from .chern import ChernConnection, certify_positive, verify_akizuki_nakano, verify_kodaira, verify_nakano
from .graded import encode_scalar
from .hermitian import (adjoint_residual, conjugation_defect, inner_product, lefschetz_adjoint_residual,
                        stokes_residual, twisted_hodge, twisted_hodge_defect)
from .hodge import (DecompositionGap, DegeneratePairing, NotSelfAdjoint, diagonalizability_certificate,
                    harmonic_space, hodge_decomposition, laplacian_intertwine_residual, serre_pairing)
from .lefschetz import IdentityViolated, LefschetzTriple, dual_lefschetz, primitive_basis, triple_identity_residuals, verify_sl2
from .linalg import EXACT, Approx, NotPositiveDefinite
from .qcp1.algebra import InvalidQ
from .qcp1.blocks import TRIANGULAR, UNITARY
from .qcp1.model import BIDEGREES, QCP1Model

REPORT_VERSION = 1
PERTURBATIONS = ("codifferential", "connection")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str = "verify"
    q: str = "4/5"
    lmax: str = "3"
    bundles: tuple[int, int] = (-5, 5)
    mode: str = "exact"
    tol: float = 0.0
    out: str | None = None
    seed: int = 0
    normalization: str = TRIANGULAR
    inject: str | None = None

    @property
    def ks(self) -> range:
        return range(self.bundles[0], self.bundles[1] + 1)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d["bundles"] = f"{self.bundles[0]}..{self.bundles[1]}"
        return d


def parse_bundles(text: str) -> tuple[int, int]:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise ConfigError(f"bundle range must look like A..B, got {text!r}") from None
    if lo > hi:
        raise ConfigError(f"empty bundle range {text!r}")
    return lo, hi


def make_config(command: str, q="4/5", lmax="3", bundles="-5..5", mode="exact", tol=None, out=None,
                seed=0, normalization=TRIANGULAR, inject=None) -> RunConfig:
    try:
        qv = Fraction(str(q))
        lv = Fraction(str(lmax))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"q and lmax must be rational, got {q!r}, {lmax!r}") from None
    if lv < 0 or (2 * lv).denominator != 1:
        raise ConfigError(f"lmax must be a non-negative half-integer, got {lmax}")
    if mode not in ("exact", "approx"):
        raise ConfigError(f"unknown mode {mode!r}")
    if normalization not in (TRIANGULAR, UNITARY):
        raise ConfigError(f"unknown normalization {normalization!r}")
    if normalization == UNITARY and mode == "exact":
        raise ConfigError("the unitary normalization needs square roots; use --mode approx")
    if mode == "exact" and tol not in (None, 0, 0.0):
        raise ConfigError("exact mode requires residuals to vanish; --tol applies to approx mode only")
    if inject is not None and inject not in PERTURBATIONS:
        raise ConfigError(f"unknown perturbation {inject!r}")
    lo, hi = parse_bundles(bundles) if isinstance(bundles, str) else tuple(bundles)
    tol_v = float(tol) if tol is not None else (1e-25 if mode == "approx" else 0.0)
    return RunConfig(command, str(qv), str(lv), (lo, hi), mode, tol_v, out, int(seed), normalization, inject)


def build_model(cfg: RunConfig) -> QCP1Model:
    ar = EXACT if cfg.mode == "exact" else Approx()
    try:
        model = QCP1Model(Fraction(cfg.q), Fraction(cfg.lmax), ar, cfg.normalization)
    except InvalidQ as exc:
        raise ConfigError(f"InvalidQ: {exc}") from None
    for k in cfg.ks:
        if Fraction(abs(k) + 2, 2) > model.lmax and Fraction(abs(k), 2) > model.lmax:
            raise ConfigError(f"cutoff lmax={cfg.lmax} holds no block of E_{k}")
    return model


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    config: RunConfig
    checks: list = field(default_factory=list)
    cohomology: list = field(default_factory=list)
    certificates: list = field(default_factory=list)

    def add(self, name: str, residual: float, ok: bool | None = None, detail: str = ""):
        passed = residual <= self.config.tol if ok is None else ok
        entry = {"name": name, "status": "pass" if passed else "fail", "max_residual": float(residual)}
        if detail:
            entry["detail"] = detail
        self.checks.append(entry)

    @property
    def passed(self) -> bool:
        return all(c["status"] == "pass" for c in self.checks)

    def first_failure(self) -> str | None:
        return next((c["name"] for c in self.checks if c["status"] == "fail"), None)

    def to_dict(self) -> dict:
        return {
            "version": {"schema": REPORT_VERSION, "toolkit": __version__},
            "config": self.config.echo(),
            "checks": self.checks,
            "cohomology": self.cohomology,
            "certificates": self.certificates,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        cfg = self.config
        lines = [f"q={cfg.q} lmax={cfg.lmax} mode={cfg.mode} normalization={cfg.normalization}"]
        if self.checks:
            width = max(len(c["name"]) for c in self.checks)
            for c in self.checks:
                lines.append(f"{c['name']:<{width}}  {c['status'].upper():<4}  {c['max_residual']:.3g}")
        if self.cohomology:
            lines.append("")
            lines.append(f"{'k':>4} {'h00':>4} {'h01':>4} {'h10':>4} {'h11':>4}")
            for row in self.cohomology:
                lines.append(f"{row['bundle']:>4} {row['h00']:>4} {row['h01']:>4} {row['h10']:>4} {row['h11']:>4}")
            lines.append(f"(blocks up to l = {cfg.lmax})")
        for cert in self.certificates:
            body = " ".join(f"{k}={cert[k]}" for k in sorted(cert) if k not in ("kind", "cutoff", "mode"))
            lines.append(f"[{cert['kind']}] {body}")
        lines.append("PASS" if self.passed else f"FAIL: {self.first_failure()}")
        return "\n".join(lines) + "\n"


def _guarded(report: Report, name: str, fn):
    """Run ``fn() -> residual``; exceptions from failed checks count as failures."""
    try:
        r = fn()
    except (IdentityViolated, DecompositionGap, NotSelfAdjoint, NotPositiveDefinite, DegeneratePairing,
            AssertionError) as exc:
        report.add(name, float("inf"), ok=False, detail=f"{type(exc).__name__}: {exc}")
        return None
    report.add(name, r)
    return r


def _random_primitive(pair, k: int, rng: random.Random) -> dict | None:
    basis = primitive_basis(pair, k)
    vecs = [(l, v) for l, vs in basis.items() for v in vs]
    if not vecs:
        return None
    out = pair.space.zero_vector()
    for l, v in vecs:
        c = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        out[l] = [x + c * y for x, y in zip(out[l], v)]
    return out


def _perturbed(cfg: RunConfig, data, dbar_dag):
    conn = ChernConnection(data, del_sign=-1 if cfg.inject == "connection" else 1)
    if cfg.inject == "codifferential":
        dbar_dag = dbar_dag.scale(Fraction(1001, 1000))
    return conn, dbar_dag


def _cutoff(cfg: RunConfig) -> dict:
    return {"cutoff": cfg.lmax, "mode": cfg.mode}


def _cohomology_row(model: QCP1Model, cfg: RunConfig, k: int, report: Report) -> None:
    table = model.cohomology(k)
    row = {"bundle": k}
    agree = True
    for (a, b), (harm, quot) in table.items():
        row[f"h{a}{b}"] = harm
        agree &= harm == quot
    row.update(_cutoff(cfg))
    report.cohomology.append(row)
    report.add(f"E_{k}/two-path-cohomology", 0.0 if agree else float("inf"), ok=agree)


def cmd_verify(cfg: RunConfig, model: QCP1Model | None = None) -> Report:
    model = model or build_model(cfg)
    report = Report(cfg)
    rng = random.Random(cfg.seed)
    for k in cfg.ks:
        data = model.bundle(k).data
        pkg = model.dirac(k)
        conn, dbar_dag = _perturbed(cfg, data, pkg.d_dag)
        tag = f"E_{k}"
        _guarded(report, f"{tag}/sl2", lambda: verify_sl2(data.V, raise_on_failure=False).max_residual())

        def triple():
            T = LefschetzTriple(data.V, conn.nabla, check=False)
            Lam = dual_lefschetz(data.V)
            worst = 0.0
            for deg in range(2):
                alpha = _random_primitive(data.V, deg, rng)
                if alpha is None:
                    continue
                for j in range(2 - deg):
                    worst = max(worst, *triple_identity_residuals(T, alpha, deg, j, Lam))
            return worst
        _guarded(report, f"{tag}/lefschetz-triple", triple)

        def metric():
            inner = inner_product(data)
            inner.check_positive()
            herm = max((G - G.H).max_abs() for G in inner.grams.values())
            return max(herm, conjugation_defect(data), twisted_hodge_defect(data), lefschetz_adjoint_residual(data))
        _guarded(report, f"{tag}/metric", metric)
        _guarded(report, f"{tag}/dbar-adjoint", lambda: adjoint_residual(pkg.inner, data.dbar_V, dbar_dag))
        _guarded(report, f"{tag}/stokes", lambda: stokes_residual(data, data.dbar_V, data.dbar_W))
        _guarded(report, f"{tag}/chern-connection",
                 lambda: max(conn.del_squared_residual(), (conn.del_ - model.bundle(k).del_V).max_residual()))
        _guarded(report, f"{tag}/nakano", lambda: verify_nakano(conn).max_residual())
        _guarded(report, f"{tag}/akizuki-nakano", lambda: verify_akizuki_nakano(conn).max_residual())

        def decomposition():
            worst = 0.0
            for bd in BIDEGREES:
                worst = max(worst, hodge_decomposition(pkg, bd).orthogonality_residual)
            return worst
        _guarded(report, f"{tag}/hodge-decomposition", decomposition)
        _guarded(report, f"{tag}/intertwine", lambda: laplacian_intertwine_residual(
            pkg.laplacian, model.dual_dirac(k).laplacian, twisted_hodge(data)[0]))
        _cohomology_row(model, cfg, k, report)

        cert = certify_positive(conn, bundle=k, tol=cfg.tol)
        report.certificates.append({"kind": "positivity", "bundle": k, "passed": cert.passed,
                                    "scale": encode_scalar(cert.scale) if cert.scale is not None else None,
                                    "reason": cert.reason, **_cutoff(cfg)})
        try:
            diag = diagonalizability_certificate(pkg, tol=cfg.tol).certified
        except (NotSelfAdjoint, NotPositiveDefinite):
            diag = False
        report.certificates.append({"kind": "diagonalizability", "bundle": k, "certified": diag, **_cutoff(cfg)})
        if cert.passed:
            try:
                verify_kodaira(conn, pkg, True)
                ok = True
            except AssertionError:
                ok = False
            report.add(f"{tag}/kodaira-vanishing", 0.0 if ok else float("inf"), ok=ok)
    fano = model.fano_report(tol=cfg.tol)
    report.certificates.append({"kind": "fano", "passed": fano.passed, "factorisable": fano.factorisable,
                                "canonical_invertible": fano.canonical_invertible,
                                "anticanonical_positive": fano.anticanonical_positive,
                                "h01_trivial": fano.h01_trivial, **_cutoff(cfg)})
    report.certificates.append(_calculus_certificate(model, cfg))
    return report


def _calculus_certificate(model: QCP1Model, cfg: RunConfig) -> dict:
    tw = model.frame_twists()
    return {"kind": "calculus", "frame_twist_10": tw[(1, 0)], "frame_twist_01": tw[(0, 1)],
            "coinvariant_11_dim": model.coinvariant_11_dimension(),
            "note": "differentials fixed up to scale; kappa = -i e+ e- absorbs it", **_cutoff(cfg)}


def cmd_cohomology(cfg: RunConfig, model: QCP1Model | None = None) -> Report:
    model = model or build_model(cfg)
    report = Report(cfg)
    for k in cfg.ks:
        _cohomology_row(model, cfg, k, report)
    return report


def cmd_serre(cfg: RunConfig, model: QCP1Model | None = None) -> Report:
    model = model or build_model(cfg)
    report = Report(cfg)
    for k in cfg.ks:
        data = model.bundle(k).data
        pv, pw = model.dirac(k), model.dual_dirac(k)
        for a, b in BIDEGREES:
            hv = harmonic_space(pv, (a, b))
            hw = harmonic_space(pw, (1 - a, 1 - b))
            name = f"E_{k}/serre/{a}{b}"
            try:
                sp = serre_pairing(data.pairing, hv, hw, model.ar)
                rank = sum(sp.ranks.values())
                report.add(name, 0.0, ok=True)
            except DegeneratePairing as exc:
                rank = None
                report.add(name, float("inf"), ok=False, detail=str(exc))
            dv = sum(len(v) for v in hv.values())
            dw = sum(len(v) for v in hw.values())
            report.certificates.append({"kind": "serre", "bundle": k, "bidegree": f"{a}{b}", "dim": dv,
                                        "dual_dim": dw, "rank": rank, **_cutoff(cfg)})
    return report


COMMANDS = {"verify": cmd_verify, "cohomology": cmd_cohomology, "serre": cmd_serre}


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qkahler", description="Twisted Kaehler checks on the quantum projective line.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON file with default values for the options below")
    p.add_argument("--q", help="deformation parameter as a rational string (default 4/5)")
    p.add_argument("--lmax", help="Peter-Weyl cutoff, a half-integer (default 3)")
    p.add_argument("--bundles", help="bundle range A..B (default -5..5; write --bundles=-3..3 for negatives)")
    p.add_argument("--mode", choices=("exact", "approx"))
    p.add_argument("--tol", type=float, help="residual tolerance, approx mode only (default 1e-25)")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--seed", type=int, help="seed for randomized checks (default 0)")
    p.add_argument("--normalization", choices=(TRIANGULAR, UNITARY))
    p.add_argument("--format", choices=("text", "json"), default="text", help="stdout format")
    p.add_argument("--inject-perturbation", choices=PERTURBATIONS, dest="inject",
                   help="deliberately break an operator (negative control)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        opts: dict = {}
        if args.config:
            with open(args.config) as fh:
                opts.update(json.load(fh))
        for key in ("q", "lmax", "bundles", "mode", "tol", "out", "seed", "normalization", "inject"):
            val = getattr(args, key)
            if val is not None:
                opts[key] = val
        cfg = make_config(args.command, **opts)
        model = build_model(cfg)
    except (ConfigError, OSError, TypeError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = COMMANDS[cfg.command](cfg, model)
    text = report.to_json()
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text if args.format == "json" else report.to_text())
    if not report.passed:
        print(f"check failed: {report.first_failure()}", file=sys.stderr)
        return 1
    return 0
