"""Command-line sweep runner. Every option can also be set as FONREV_<OPTION>."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from ..decalg import POLICIES, DecAlgConfig
from ..netmodel import ParseError
from .runner import ALGORITHMS, ScenarioConfig, emit_csv, run_scenario

ENV_PREFIX = "FONREV"


def parse_range(text: str) -> tuple[float, ...]:
    """``X`` or ``LO:HI:STEP`` (inclusive) or ``a,b,c``."""
    text = text.strip()
    if ":" in text:
        try:
            lo, hi, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise click.BadParameter(f"expected LO:HI:STEP, got {text!r}") from None
        if step == 0 or (hi - lo) / step < 0:
            raise click.BadParameter(f"empty range {text!r}")
        n = int(round((hi - lo) / step + 1e-9))
        return tuple(round(lo + k * step, 10) for k in range(n + 1))
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise click.BadParameter(f"cannot parse {text!r}") from None
    if not vals:
        raise click.BadParameter("empty list")
    return vals


def _ints(text: str) -> tuple[int, ...]:
    vals = parse_range(text)
    if any(v != int(v) for v in vals):
        raise click.BadParameter(f"expected integers, got {text!r}")
    return tuple(int(v) for v in vals)


@click.command(context_settings={"auto_envvar_prefix": ENV_PREFIX, "show_default": True})
@click.option("--topology", required=True, help="Topology file or builtin:nsf / builtin:six_node.")
@click.option("--length-scale", type=float, default=1.0, help="Multiply every link length.")
@click.option("--demands", default=None, help="Demand file; mutually exclusive with --gen.")
@click.option("--gen", default=None, help="Generate N requests (N or a list/range for a load sweep).")
@click.option("--rates", default="1000", help="Bit-rate set in Gbps, e.g. 250:1750:250 or 250,500.")
@click.option("--psd", default=None, help="PSD in dBm/GHz, DBM or DBM:DBM:STEP.")
@click.option("--catalog", "catalogs", multiple=True, default=("adaptive:2,2",),
              help="adaptive:m,f | fec:m,f | comma list of modes; repeat to sweep.")
@click.option("--catalog-file", default=None, help="Threshold table replacing the bundled one.")
@click.option("--algo", type=click.Choice(ALGORITHMS), default="decalg")
@click.option("--runs", type=int, default=10)
@click.option("--seed", type=int, default=0, help="Run r uses seed+r.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV path (stdout if omitted).")
@click.option("--lp-dir", default=None, help="Directory for LP files with --algo milp-export.")
@click.option("--k", type=int, default=4)
@click.option("--n-rtma", type=int, default=40)
@click.option("--n-round", type=int, default=2)
@click.option("--phi", type=float, default=0.5)
@click.option("--eps1", type=float, default=0.01)
@click.option("--eps2", type=float, default=0.001)
@click.option("--guard", type=float, default=12.5, help="Guard band and default scan step (GHz).")
@click.option("--step", type=float, default=None, help="Scan step if finer than the guard (GHz).")
@click.option("--policy", type=click.Choice(POLICIES), default="sa-ra")
@click.option("--xci-model", type=click.Choice(["rmax", "exact"]), default="rmax")
@click.option("--max-nodes", type=int, default=5000, help="Branch-and-bound budget before the MILP fallback.")
@click.option("--jobs", type=int, default=1)
def main(topology, length_scale, demands, gen, rates, psd, catalogs, catalog_file, algo, runs, seed, out,
         lp_dir, k, n_rtma, n_round, phi, eps1, eps2, guard, step, policy, xci_model, max_nodes, jobs):
    """Run a provisioning sweep and write one CSV row per (point, run)."""
    if demands and gen:
        raise click.UsageError("--demands and --gen are mutually exclusive")
    try:
        heuristic = DecAlgConfig(
            k=k, n_rtma=n_rtma, n_round=n_round, phi=phi, eps2=eps2, policy=policy, guard_ghz=guard,
            step_ghz=step, seed=seed, xci_model=xci_model, max_nodes=max_nodes,
        )
        if algo == "milp-export" and lp_dir is None:
            lp_dir = str(Path(out).with_suffix("")) + "_lp" if out else "lp"
        cfg = ScenarioConfig(
            topology=topology,
            length_scale=length_scale,
            demands=demands,
            n_requests=_ints(gen) if gen else (10,),
            rates=parse_range(rates),
            psd_dbm_per_ghz=parse_range(psd) if psd else None,
            catalogs=tuple(catalogs),
            catalog_file=catalog_file,
            algorithm=algo,
            runs=runs,
            seed=seed,
            heuristic=heuristic,
            eps1=eps1,
            lp_dir=lp_dir,
            jobs=jobs,
        )
    except (ValueError, FileNotFoundError, ParseError) as exc:
        raise click.UsageError(str(exc)) from None
    records = run_scenario(cfg)
    text = emit_csv(records)
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)
    failed = [r for r in records if r.status.startswith("failed")]
    for r in failed:
        click.echo(f"point {r.point} run {r.run}: {r.status}", err=True)
    sys.exit(0)


if __name__ == "__main__":
    main()
