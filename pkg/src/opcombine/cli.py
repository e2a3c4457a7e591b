"""
Command-line front end.

Every subcommand prints ``key = value`` results followed by an audit block
(input digest, seed, methods). Exit status is 0 on success, 1 on a usage
error and 2 on a data or numerical error. Statistical inputs (seed, alpha,
xi, threshold, confidence levels) have no defaults.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import conjugate, dirichlet, evidence, lda, three_source
from .dataio import exceedance_quantile_level, file_digest, ingest_losses, lognormal_from_exceedances, load_scenario
from .distributions import (
    GammaParams,
    GIGParams,
    LognormalParams,
    NegBinParams,
    NormalParams,
    gig_mean,
    gig_mode,
)
from .errors import DomainError, OpRiskError

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.lstrip("-").replace("-", "_")) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required value(s): {', '.join(missing)}")


class _Out:
    """Collects result lines, input files and methods for the audit block."""

    def __init__(self, argv, stream):
        self.argv = list(argv)
        self.stream = stream
        self.files: list[str] = []
        self.methods: list[str] = []
        self.seed = None

    def kv(self, key, value):
        if isinstance(value, float):
            value = repr(value)
        print(f"{key} = {value}", file=self.stream)

    def line(self, text=""):
        print(text, file=self.stream)

    def columns(self, header, rows, path=None):
        text = "# " + " ".join(header) + "\n" + "\n".join(" ".join(repr(float(v)) for v in r) for r in rows) + "\n"
        if path:
            Path(path).write_text(text)
            self.kv("columns_written", path)
        else:
            self.stream.write(text)

    def audit(self):
        digest = file_digest(*self.files, extra="\0".join(self.argv)) if self.files else hashlib.sha256(
            "\0".join(self.argv).encode()).hexdigest()
        self.line("# audit")
        self.line(f"# command: {' '.join(self.argv)}")
        self.line(f"# input_sha256: {digest}")
        self.line(f"# seed: {self.seed if self.seed is not None else 'none (deterministic)'}")
        for m in self.methods:
            self.line(f"# method: {m}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _counts_from_args(args, out):
    if args.counts is not None:
        return args.counts
    if args.losses is None:
        raise UsageError(f"{args.command}: give --counts or --losses")
    _need(args, "--threshold", "--cell")
    ing = ingest_losses(args.losses, args.threshold)
    out.files.append(args.losses)
    out.kv("records_below_threshold", ing.truncated)
    out.kv("rows_with_errors", len(ing.errors))
    if args.cell not in ing.annual_counts:
        raise DomainError(f"cell {args.cell!r} has no losses above the threshold")
    out.kv("years", f"{ing.years[0]}-{ing.years[-1]}")
    return list(ing.annual_counts[args.cell])


def _fit_severity_from_exceedances(args, out):
    _need(args, "--scenario", "--intensity")
    cfg = load_scenario(args.scenario)
    out.files.append(args.scenario)
    names = args.name.split(",") if args.name else sorted(cfg.exceedances)
    missing = [n for n in names if n not in cfg.exceedances]
    if missing:
        raise DomainError(f"no exceedance statement named {', '.join(missing)} in {args.scenario}")
    stmts = [cfg.exceedances[n] for n in names]
    for n, st in zip(names, stmts):
        rec = args.recurrence or st.recurrence
        out.kv(f"level[{n}]", exceedance_quantile_level(st, args.intensity, rec))
        out.kv(f"recurrence[{n}]", rec)
    ln = lognormal_from_exceedances(stmts, args.intensity, args.recurrence)
    out.kv("mu", ln.mu)
    out.kv("sigma", ln.sigma)
    out.methods.append("lognormal severity from exceedance quantiles: least squares on ln L = mu + sigma z_p")


def cmd_fit_prior(args, out):
    if args.exceedances:
        return _fit_severity_from_exceedances(args, out)
    if args.losses is not None:
        _need(args, "--threshold")
        ing = ingest_losses(args.losses, args.threshold)
        out.files.append(args.losses)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            g = conjugate.fit_prior_empirical_bayes_poisson(list(ing.annual_counts.values()))
        for w in caught:
            out.kv("warning", f"{w.category.__name__}: {w.message}")
        out.methods.append("empirical Bayes: maximum of negative binomial marginal likelihood")
    elif args.vco is not None:
        _need(args, "--mean")
        g = conjugate.gamma_prior_from_vco(args.mean, args.vco)
        out.methods.append("gamma prior from mean and coefficient of variation")
    else:
        if args.scenario is not None:
            _need(args, "--name")
            cfg = load_scenario(args.scenario)
            out.files.append(args.scenario)
            if args.name not in cfg.elicited_intervals:
                raise DomainError(f"no elicited interval named {args.name!r} in {args.scenario}")
            e = cfg.elicited_intervals[args.name]
        else:
            _need(args, "--mean", "--a", "--b", "--p")
            e = conjugate.ElicitedInterval(args.mean, args.a, args.b, args.p)
        g = conjugate.fit_gamma_prior_from_interval(e)
        out.methods.append("gamma prior from elicited interval: bisection on log shape over [1e-4, 1e6]")
    out.kv("alpha", g.shape)
    out.kv("beta", g.scale)
    out.kv("prior_mean", g.mean())
    out.kv("prior_vco", 1.0 / math.sqrt(g.shape))


def cmd_update(args, out):
    if args.family == "poisson":
        counts = _counts_from_args(args, out)
        if args.improper:
            post = conjugate.poisson_gamma_posterior_improper(counts)
            out.methods.append("Poisson-gamma posterior under a flat prior")
            prior = None
        else:
            _need(args, "--alpha", "--beta")
            prior = GammaParams(args.alpha, args.beta)
            post = conjugate.poisson_gamma_posterior(prior, counts)
            out.methods.append("Poisson-gamma conjugate update, one year at a time")
        out.kv("alpha_T", post.shape)
        out.kv("beta_T", post.scale)
        out.kv("posterior_mean", post.mean())
        out.kv("posterior_sd", post.std())
        if prior is not None:
            cd = conjugate.credibility_decomposition(prior, counts)
            out.kv("credibility_weight", cd.weight)
            out.kv("mle", cd.mle if cd.has_data else "undefined (no data)")
        nb = conjugate.poisson_predictive(post)
        out.kv("predictive_negbin_size", nb.size)
        out.kv("predictive_negbin_prob", nb.prob)
        if prior is not None and args.trajectory:
            traj = conjugate.poisson_gamma_trajectory(prior, counts)
            mle = conjugate.mle_trajectory(counts)
            rows = [
                (k + 1, n, p.shape, p.scale, p.mean(), p.std(), m)
                for k, (n, p, m) in enumerate(zip(counts, traj, mle))
            ]
            out.columns(("year", "n", "alpha", "beta", "mean", "sd", "mle"), rows, args.trajectory)
    else:
        _need(args, "--mu0", "--sigma0", "--sigma")
        if args.log_losses is not None:
            y = args.log_losses
        else:
            if args.losses is None:
                raise UsageError("update: give --log-losses or --losses")
            _need(args, "--threshold", "--cell")
            ing = ingest_losses(args.losses, args.threshold)
            out.files.append(args.losses)
            y = [math.log(r.gross_loss) for r in ing.records if r.cell == args.cell]
        prior = NormalParams(args.mu0, args.sigma0)
        data = conjugate.LogLossSample(tuple(y), args.sigma)
        post = conjugate.lognormal_normal_posterior(prior, data)
        out.methods.append("lognormal-normal conjugate update with known sigma")
        out.kv("n", len(y))
        out.kv("mu_posterior_mean", post.mean)
        out.kv("mu_posterior_sd", post.stdev)
        out.kv("credibility_weight", conjugate.lognormal_credibility_weight(prior, len(y), args.sigma))


def _xi(args, opinions, out):
    if args.xi is not None and args.estimate_xi:
        raise UsageError("three-source: give either --xi or --estimate-xi, not both")
    if args.xi is not None:
        out.kv("xi_source", "supplied")
        return args.xi
    if args.estimate_xi:
        xi = three_source.estimate_xi(opinions)
        out.kv("xi_source", "estimated from expert spread")
        return xi
    raise UsageError("three-source: missing required value(s): --xi or --estimate-xi")


def cmd_three_source(args, out):
    if args.family == "frequency":
        _need(args, "--alpha0", "--beta0", "--scale")
        counts = _counts_from_args(args, out) if (args.counts is not None or args.losses is not None) else []
        experts = None
        if args.experts:
            xi = _xi(args, args.experts, out)
            experts = three_source.ExpertIntensityOpinions(tuple(args.experts), xi)
        ev = three_source.FrequencyEvidence(GammaParams(args.alpha0, args.beta0), counts, args.scale, experts)
        p = three_source.gig_posterior(ev)
        out.methods.append("Poisson-gamma-gamma model: generalized inverse Gaussian posterior")
        out.kv("nu", p.nu)
        out.kv("omega", p.omega)
        out.kv("phi", p.phi)
        if experts is not None:
            out.kv("xi", experts.xi)
        out.kv("posterior_mean", gig_mean(p, gamma_limit=True))
        out.kv("posterior_mode", gig_mode(p))
        if args.trajectory:
            q = three_source.gig_prior(ev.prior, experts)
            rows = []
            for k, n in enumerate(counts, 1):
                q = three_source.gig_update_step(q, n, args.scale)
                rows.append((k, n, q.nu, q.omega, gig_mean(q, gamma_limit=True), gig_mode(q)))
            out.columns(("year", "n", "nu", "omega", "mean", "mode"), rows, args.trajectory)
    else:
        _need(args, "--mu0", "--sigma0", "--sigma")
        y = args.log_losses or []
        mus = args.expert_mus or []
        xi = None
        if mus:
            if args.estimate_xi:
                raise UsageError("three-source: --estimate-xi applies to frequency opinions only")
            _need(args, "--xi")
            xi = args.xi
            out.kv("xi_source", "supplied")
        ev = three_source.SeverityEvidence(
            NormalParams(args.mu0, args.sigma0), conjugate.LogLossSample(tuple(y), args.sigma), tuple(mus), xi
        )
        post = three_source.lnn_posterior(ev)
        w = three_source.lnn_weights(ev)
        out.methods.append("lognormal-normal-normal model: three credibility weights")
        out.kv("mu_posterior_mean", post.mean)
        out.kv("mu_posterior_sd", post.stdev)
        out.kv("weight_prior", w.prior)
        out.kv("weight_internal", w.internal)
        out.kv("weight_expert", w.expert)


def cmd_dirichlet(args, out):
    if args.scenario is not None:
        _need(args, "--name")
        cfg = load_scenario(args.scenario)
        out.files.append(args.scenario)
        if args.name not in cfg.dirichlet:
            raise DomainError(f"no dirichlet entry named {args.name!r}")
        prior = cfg.dirichlet[args.name]
    else:
        _need(args, "--knots", "--values", "--concentration")
        base = dirichlet.StepDistribution(tuple(args.knots), tuple(args.values), args.interpolation)
        prior = dirichlet.DirichletPrior(base, args.concentration)
    _need(args, "--grid", "--lower-q", "--upper-q")
    post = dirichlet.dp_posterior(prior, args.samples or [])
    out.methods.append("Dirichlet process: beta marginal band and conjugate base update")
    out.kv("interpolation", prior.base.interpolation)
    out.kv("prior_concentration", prior.concentration)
    out.kv("posterior_concentration", post.concentration)
    out.kv("n_samples", len(args.samples or []))
    cols = dirichlet.band_columns(post, args.grid, args.lower_q, args.upper_q)
    out.columns(("x", "lower", "mean", "upper"), cols, args.out)


def cmd_ds_combine(args, out):
    a = evidence.parse_ds(Path(args.a).read_text())
    b = evidence.parse_ds(Path(args.b).read_text())
    out.files += [args.a, args.b]
    c, k = evidence.dempster_combine(a, b, allow_mixed=args.allow_mixed)
    out.methods.append("Dempster's rule with merged identical intersections")
    out.kv("conflict", f"{k}" if isinstance(k, Fraction) else repr(float(k)))
    out.kv("conflict_float", float(k))
    out.kv("n_focal_elements", len(c))
    text = evidence.format_ds(c)
    if args.out:
        Path(args.out).write_text(text)
        out.kv("structure_written", args.out)
    else:
        out.line("# combined structure: x y p")
        out.stream.write(text)
    if args.pbox_out:
        Path(args.pbox_out).write_text(evidence.format_pbox(evidence.plausibility_belief(c)))
        out.kv("pbox_written", args.pbox_out)


def cmd_ks_bounds(args, out):
    if args.samples_file:
        samples = _floats(Path(args.samples_file).read_text().replace("\n", ","))
        out.files.append(args.samples_file)
    elif args.samples:
        samples = args.samples
    else:
        raise UsageError("ks-bounds: give --samples or --samples-file")
    _need(args, "--alpha")
    box = evidence.ks_bounds(samples, args.alpha, tuple(args.support) if args.support else None)
    out.methods.append("Kolmogorov-Smirnov band F_n -/+ D(alpha, n); statistical, not sure bounds")
    out.kv("n", len(samples))
    out.kv("D", evidence.ks_critical_value(args.alpha, len(samples)))
    out.kv("kind", box.kind)
    text = evidence.format_pbox(box)
    if args.out:
        Path(args.out).write_text(text)
        out.kv("pbox_written", args.out)
    else:
        out.stream.write(text)


def _parse_cell_spec(spec: str) -> lda.RiskCellModel:
    parts = spec.split(":")
    if len(parts) != 4:
        raise UsageError(f"--cell expects label:lambda:mu:sigma, got {spec!r}")
    label, lam, mu, sigma = parts
    return lda.RiskCellModel(float(lam), LognormalParams(float(mu), float(sigma)), label)


def _cell_from_json(i, d) -> lda.RiskCellModel:
    try:
        label = d.get("label", f"cell{i}")
        (fk, fv), = d["frequency"].items()
        (sk, sv), = d["severity"].items()
    except (KeyError, ValueError, AttributeError) as exc:
        raise DomainError(f"model cell {i}: expected 'frequency' and 'severity' objects ({exc})") from None
    freq = {
        "poisson": lambda v: float(v),
        "gamma": lambda v: GammaParams(*v),
        "negbin": lambda v: NegBinParams(*v),
        "gig": lambda v: GIGParams(*v),
    }
    sev = {
        "lognormal": lambda v: LognormalParams(*v),
        "lognormal_posterior": lambda v: lda.LognormalPosterior(NormalParams(v[0], v[1]), v[2]),
    }
    if fk not in freq or sk not in sev:
        raise DomainError(f"model cell {i}: unknown frequency {fk!r} or severity {sk!r}")
    return lda.RiskCellModel(freq[fk](fv), sev[sk](sv), label)


def cmd_var(args, out):
    _need(args, "--n-sims", "--seed", "--q")
    cells = [_parse_cell_spec(s) for s in (args.cell or [])]
    if args.model:
        doc = json.loads(Path(args.model).read_text())
        out.files.append(args.model)
        cells += [_cell_from_json(i, d) for i, d in enumerate(doc.get("cells", []))]
    if not cells:
        raise UsageError("var: give at least one --cell or a --model file")
    out.seed = args.seed
    report, sim = lda.capital_report(
        cells, args.n_sims, args.seed, q=args.q, aggregation=args.aggregation,
        mode=args.mode, n_workers=args.workers,
    )
    out.methods += list(report.methods)
    out.stream.write(report.to_text())
    if args.histogram:
        cols = lda.histogram_columns(sim.total, bins=args.bins, log=args.log_bins)
        out.columns(("left", "right", "density"), cols, args.histogram)


def cmd_sufficiency(args, out):
    _need(args, "--q")
    if args.family != "lognormal":
        raise UsageError("sufficiency: only --family lognormal is supported")
    _need(args, "--mu", "--sigma")
    sev = LognormalParams(args.mu, args.sigma)
    out.methods.append("asymptotic variance of the empirical quantile")
    if args.eps is not None:
        out.kv("n_required", lda.data_sufficiency(args.q, args.eps, sev))
        out.kv("n_required_unrounded", lda.required_sample_size(args.q, args.eps, sev))
    if args.n is not None:
        out.kv("epsilon", lda.sufficiency_epsilon(args.q, args.n, sev))
    if args.expected_n is not None:
        p = lda.single_loss_quantile_level(args.q, args.expected_n)
        out.kv("single_loss_level", p)
        out.kv("single_loss_quantile", sev.quantile(p))
    if args.eps is None and args.n is None and args.expected_n is None:
        raise UsageError("sufficiency: give --eps, --n or --expected-n")


def cmd_min_var(args, out):
    if not args.estimate or len(args.estimate) < 2:
        raise UsageError("min-var: give at least two --estimate value:variance[:source]")
    ests = []
    for spec in args.estimate:
        parts = spec.split(":")
        if len(parts) not in (2, 3):
            raise UsageError(f"--estimate expects value:variance[:source], got {spec!r}")
        try:
            ests.append(lda.Estimate(float(parts[0]), float(parts[1]), *(parts[2:] or ["internal"])))
        except ValueError as exc:
            raise DomainError(str(exc)) from None
    c = lda.min_variance_combine(ests)
    out.methods.append("minimum-variance unbiased linear combination (inverse-variance weights)")
    out.kv("value", c.value)
    out.kv("variance", c.variance)
    out.kv("certain", c.certain)
    for i, w in enumerate(c.weights):
        out.kv(f"weight[{i}]", w)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="opcombine", description="Combine internal data, external data and expert opinion "
                "for operational risk, and compute capital by Monte Carlo.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def data_flags(sp):
        sp.add_argument("--counts", type=_ints, help="annual counts, comma separated")
        sp.add_argument("--losses", help="loss CSV (date,cell,gross_loss,recovery)")
        sp.add_argument("--threshold", type=float, help="reporting threshold (required with --losses)")
        sp.add_argument("--cell", help="cell label to use from --losses")

    sp = sub.add_parser("fit-prior", help="gamma prior for an intensity, or lognormal severity from exceedances")
    sp.add_argument("--mean", type=float)
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--p", type=float)
    sp.add_argument("--vco", type=float)
    sp.add_argument("--scenario", help="scenario JSON; use with --name")
    sp.add_argument("--name")
    sp.add_argument("--losses", help="loss CSV; fits by empirical Bayes across cells")
    sp.add_argument("--exceedances", action="store_true",
                    help="fit a lognormal severity to the scenario's exceedance statements (needs --intensity)")
    sp.add_argument("--intensity", type=float, help="annual event intensity for --exceedances")
    sp.add_argument("--recurrence", choices=("mean", "median"),
                    help="override how 'every d years' is read (default: per statement, mean)")
    sp.add_argument("--threshold", type=float)
    sp.set_defaults(func=cmd_fit_prior)

    sp = sub.add_parser("update", help="conjugate posterior from internal data")
    sp.add_argument("--family", choices=("poisson", "lognormal"), required=True)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--improper", action="store_true")
    data_flags(sp)
    sp.add_argument("--mu0", type=float)
    sp.add_argument("--sigma0", type=float)
    sp.add_argument("--sigma", type=float, help="known lognormal sigma")
    sp.add_argument("--log-losses", type=_floats)
    sp.add_argument("--trajectory", help="write per-year posterior columns here")
    sp.set_defaults(func=cmd_update)

    sp = sub.add_parser("three-source", help="internal data, external prior and experts together")
    sp.add_argument("--family", choices=("frequency", "severity"), required=True)
    sp.add_argument("--alpha0", type=float)
    sp.add_argument("--beta0", type=float)
    sp.add_argument("--scale", type=float, help="frequency scale V")
    data_flags(sp)
    sp.add_argument("--experts", type=_floats, help="expert intensity opinions")
    sp.add_argument("--xi", type=float)
    sp.add_argument("--estimate-xi", action="store_true")
    sp.add_argument("--mu0", type=float)
    sp.add_argument("--sigma0", type=float)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--log-losses", type=_floats)
    sp.add_argument("--expert-mus", type=_floats)
    sp.add_argument("--trajectory")
    sp.set_defaults(func=cmd_three_source)

    sp = sub.add_parser("dirichlet", help="scenario curve blended with data")
    sp.add_argument("--knots", type=_floats)
    sp.add_argument("--values", type=_floats)
    sp.add_argument("--interpolation", choices=("linear", "step"), default="linear")
    sp.add_argument("--concentration", type=float)
    sp.add_argument("--scenario")
    sp.add_argument("--name")
    sp.add_argument("--samples", type=_floats)
    sp.add_argument("--grid", type=_floats)
    sp.add_argument("--lower-q", type=float)
    sp.add_argument("--upper-q", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_dirichlet)

    sp = sub.add_parser("ds-combine", help="Dempster's rule for two structure files")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--allow-mixed", action="store_true",
                    help="acknowledge combining statistical with sure evidence")
    sp.add_argument("--out")
    sp.add_argument("--pbox-out")
    sp.set_defaults(func=cmd_ds_combine)

    sp = sub.add_parser("ks-bounds", help="Kolmogorov-Smirnov p-box for data")
    sp.add_argument("--samples", type=_floats)
    sp.add_argument("--samples-file")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--support", type=float, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_ks_bounds)

    sp = sub.add_parser("var", help="annual-loss quantile by Monte Carlo")
    sp.add_argument("--cell", action="append", help="label:lambda:mu:sigma (Poisson / lognormal)")
    sp.add_argument("--model", help="JSON with a 'cells' list")
    sp.add_argument("--n-sims", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--q", type=float)
    sp.add_argument("--aggregation", choices=("single-cell", "sum-of-vars"), default="single-cell")
    sp.add_argument("--mode", choices=("plugin", "predictive"), default="plugin")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--histogram")
    sp.add_argument("--bins", type=int, default=100)
    sp.add_argument("--log-bins", action="store_true")
    sp.set_defaults(func=cmd_var)

    sp = sub.add_parser("sufficiency", help="observations needed for a quantile accuracy")
    sp.add_argument("--family", choices=("lognormal",), required=True)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--expected-n", type=float)
    sp.set_defaults(func=cmd_sufficiency)

    sp = sub.add_parser("min-var", help="minimum-variance combination of estimates")
    sp.add_argument("--estimate", action="append", help="value:variance[:source]")
    sp.set_defaults(func=cmd_min_var)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        out = _Out(argv, stdout)
        args.func(args, out)
        out.audit()
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (OpRiskError, ValueError, ArithmeticError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_DATA
    return EXIT_OK


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
