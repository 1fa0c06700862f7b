"""Command-line interface for the closed-form QAOA angle library."""
import click
import json
import logging
import math
import sys

from . import __version__
from .baseline import InitStrategy
from .config import default_map_for, load_config
from .errors import DomainError
from .experiments import (
    SweepConfig,
    calibrate_constant,
    compare,
    error_scaling,
    fit_records,
    read_sweep_csv,
    run_sweep,
)
from .hamiltonian import adiabatic_margin, gap_csv, gap_grid, write_gap_csv
from .schedule import (
    QaoaParams,
    ScheduleSpec,
    SearchInstance,
    Variant,
    params_to_csv,
    schedule_discrete,
    schedule_to_json,
    synth_qaoa_params,
)
from .simulator import Backend, run_qaoa, run_reference_adiabatic, state_to_csv, write_state_csv
from .trotter import TrotterOrder, evolution_error

logger = logging.getLogger(__name__)

VARIANTS = [v.value for v in Variant]
BACKENDS = [b.value for b in Backend]


def _config_keys(command):
    """Config keys a command accepts: each long flag, normalized, to its parameter."""
    keys = {}
    for p in command.params:
        if not isinstance(p, click.Option):
            continue
        for opt in p.opts:
            if opt.startswith('--'):
                keys[opt[2:].replace('-', '_')] = (p.name, p.multiple)
    return keys


def _apply_config(ctx, param, value):
    """Turn a JSON config into per-subcommand defaults; CLI flags still win."""
    if value is None or ctx.resilient_parsing:
        return
    data = load_config(value)
    commands = {name: _config_keys(command) for name, command in ctx.command.commands.items()}
    ctx.default_map = default_map_for(data, commands)


@click.group()
@click.version_option(version=__version__)
@click.option('--config', type=click.Path(), callback=_apply_config, is_eager=True,
              expose_value=False, help='JSON file whose keys mirror the command flags')
def cli():
    """AGS-QAOA: closed-form QAOA angles for unstructured search.

    Angles come from discretizing the adiabatic Grover search schedule,
    so no classical optimization loop is needed.
    """
    pass


def _set_verbose(verbose):
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


def _fail(e, verbose):
    """Report an error and exit: 2 for I/O problems, 1 for everything else."""
    click.echo(f"Error: {e}", err=True)
    if verbose:
        raise e
    sys.exit(2 if isinstance(e, OSError) else 1)


def _emit(text, out):
    if out:
        with open(out, 'w') as f:
            f.write(text)
        click.echo(f"[+] Written to {out}")
    else:
        click.echo(text.rstrip("\n"))


def _schedule_for(n_qubits, steps, variant, eps1):
    spec = ScheduleSpec(variant=Variant.from_cli(variant), R=steps, eps1=eps1)
    return schedule_discrete(spec, 2 ** n_qubits)


@cli.command()
@click.option('--n-qubits', type=int, required=True, help='Number of qubits n (N = 2^n)')
@click.option('--steps', type=int, required=True, help='Step count R (= circuit depth p)')
@click.option('--variant', type=click.Choice(VARIANTS), default='exact', help='Schedule variant')
@click.option('--eps1', type=float, default=0.1, help='Adiabatic accuracy parameter')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv',
              help='Output format')
@click.option('--out', type=click.Path(), help='Write output to file')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')
def schedule(n_qubits, steps, variant, eps1, fmt, out, verbose):
    """Emit the discrete schedule s_l and the angles gamma_l, beta_l."""
    _set_verbose(verbose)
    try:
        sched = _schedule_for(n_qubits, steps, variant, eps1)
        if sched.out_of_range:
            click.echo("[!] Schedule leaves [0, 1]; angles are kept as computed", err=True)
        params = synth_qaoa_params(sched)
        text = schedule_to_json(sched, params) if fmt == 'json' else params_to_csv(sched, params)
        _emit(text, out)
    except Exception as e:
        _fail(e, verbose)


@cli.command()
@click.option('--n-qubits', type=int, required=True, help='Number of qubits n (N = 2^n)')
@click.option('--marked', type=int, default=0, help='Index of the marked item')
@click.option('--steps', type=int, default=None, help='Step count R for synthesized angles')
@click.option('--variant', type=click.Choice(VARIANTS), default='exact', help='Schedule variant')
@click.option('--eps1', type=float, default=0.1, help='Adiabatic accuracy parameter')
@click.option('--order', type=int, default=2, help='Product-formula order for the error report (2|4)')
@click.option('--backend', type=click.Choice(BACKENDS), default='subspace', help='Simulation backend')
@click.option('--refine', type=int, default=64, help='Reference sub-steps per schedule step')
@click.option('--gamma', type=float, multiple=True, help='Explicit cost angle (repeat per layer)')
@click.option('--beta', type=float, multiple=True, help='Explicit mixer angle (repeat per layer)')
@click.option('--trace', 'record_trace', is_flag=True, help='Record success probability per layer')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='json',
              help='json: run summary; csv: final amplitudes')
@click.option('--out', type=click.Path(), help='Write output to file')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')
def simulate(n_qubits, marked, steps, variant, eps1, order, backend, refine, gamma, beta,
             record_trace, fmt, out, verbose):
    """Run one QAOA circuit, from explicit angles or from the schedule."""
    _set_verbose(verbose)
    try:
        instance = SearchInstance(n_qubits=n_qubits, marked=marked)
        sched = None
        if gamma or beta:
            params = QaoaParams(gamma=gamma, beta=beta)
            if steps is not None and steps != params.p:
                raise DomainError(f"--steps {steps} does not match {params.p} explicit layers")
        elif steps is not None:
            sched = _schedule_for(n_qubits, steps, variant, eps1)
            params = synth_qaoa_params(sched)
        else:
            raise DomainError("either --steps or --gamma/--beta is required")

        result = run_qaoa(instance, params, Backend.from_cli(backend), record_trace)
        if fmt == 'csv':
            if out:
                write_state_csv(out, result.state)
                click.echo(f"[+] Written to {out}")
            else:
                click.echo(state_to_csv(result.state).rstrip("\n"))
            return

        summary = {"instance": instance.to_dict(), "backend": backend, "p": params.p}
        summary.update(result.to_dict())
        if sched is not None:
            report = evolution_error(sched, TrotterOrder.from_int(order))
            reference = run_reference_adiabatic(instance, sched, refine)
            summary["variant"] = sched.spec.variant.value
            summary["error"] = report.to_dict()
            summary["reference_success_prob"] = reference.success_prob
        _emit(json.dumps(summary, indent=2), out)
    except Exception as e:
        _fail(e, verbose)


@cli.command()
@click.option('--n-min', type=int, default=2, help='Smallest qubit count')
@click.option('--n-max', type=int, default=10, help='Largest qubit count')
@click.option('--target-err', type=float, default=1e-3, help='Trotter error target for the R search')
@click.option('--order', '--orders', 'orders', type=int, multiple=True, default=[2],
              help='Product-formula order (repeat for several)')
@click.option('--steps', type=int, multiple=True, help='Fixed step counts instead of the R search')
@click.option('--variant', type=click.Choice(VARIANTS), default='exact', help='Schedule variant')
@click.option('--eps1', type=float, default=0.1, help='Adiabatic accuracy parameter')
@click.option('--refine', type=int, default=64, help='Reference sub-steps per schedule step')
@click.option('--seed', type=int, default=42, help='Seed for the marked items')
@click.option('--workers', type=int, default=1, help='Worker processes')
@click.option('--out', type=click.Path(), required=True, help='CSV file to write')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')
def sweep(n_min, n_max, target_err, orders, steps, variant, eps1, refine, seed, workers, out,
          verbose):
    """Sweep (n, order, R) and write one CSV row per cell."""
    _set_verbose(verbose)
    try:
        config = SweepConfig.from_dict({
            'n-min': n_min, 'n-max': n_max, 'target-err': target_err,
            'orders': list(orders), 'steps': list(steps), 'variant': variant,
            'eps1': eps1, 'refine': refine, 'seed': seed, 'workers': workers, 'out': out,
        })
        click.echo(f"Sweeping n = {n_min}..{n_max}, orders {list(config.orders)}")
        records = run_sweep(config)
        click.echo(f"[+] {len(records)} records written to {out}")
    except Exception as e:
        _fail(e, verbose)


@cli.command()
@click.option('--in', 'in_path', type=click.Path(), required=True, help='Sweep CSV to fit')
@click.option('--target-err', type=float, default=1e-3,
              help='Trotter error the sweep searched for; calibrates the step-count constant')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv',
              help='Output format')
@click.option('--out', type=click.Path(), help='Write output to file')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')
def fit(in_path, target_err, fmt, out, verbose):
    """Fit R = C * N^k per order and calibrate the step-count constant."""
    _set_verbose(verbose)
    try:
        records = read_sweep_csv(in_path)
        fits = fit_records(records)
        constants = {
            order: calibrate_constant([rec for rec in records if rec.order == order], target_err)
            for order in fits
        }
        if fmt == 'json':
            data = {str(order): dict(res.to_dict(), constant=constants[order])
                    for order, res in fits.items()}
            text = json.dumps(data, indent=2)
        else:
            lines = ["order,exponent,intercept,r_squared,constant"]
            for order, res in fits.items():
                lines.append(f"{order},{res.exponent:.17g},{res.intercept:.17g},"
                             f"{res.r_squared:.17g},{constants[order]:.17g}")
            text = "\n".join(lines) + "\n"
        _emit(text, out)
    except Exception as e:
        _fail(e, verbose)


@cli.command()
@click.option('--n-qubits', type=int, required=True, help='Number of qubits n (N = 2^n)')
@click.option('--order', type=int, default=2, help='Product-formula order (2|4|6|8)')
@click.option('--steps', type=int, multiple=True, default=[16, 32, 64, 128, 256],
              help='Step counts R (repeat)')
@click.option('--variant', type=click.Choice(VARIANTS), default='exact', help='Schedule variant')
@click.option('--eps1', type=float, default=0.1, help='Adiabatic accuracy parameter')
@click.option('--out', type=click.Path(), help='Write output to file')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')
def scaling(n_qubits, order, steps, variant, eps1, out, verbose):
    """Trotter error against R at fixed N, with its log-log slope."""
    _set_verbose(verbose)
    try:
        points, result = error_scaling(SearchInstance(n_qubits=n_qubits), TrotterOrder.from_int(order),
                                       steps, Variant.from_cli(variant), eps1)
        lines = ["R,trotter_err"] + [f"{R},{err:.17g}" for R, err in points]
        _emit("\n".join(lines) + "\n", out)
        click.echo(f"[+] slope {result.exponent:.4f} (r^2 = {result.r_squared:.6f})", err=True)
    except Exception as e:
        _fail(e, verbose)


@cli.command(name='compare')
@click.option('--n-qubits', type=int, required=True, help='Number of qubits n (N = 2^n)')
@click.option('--marked', type=int, default=0, help='Index of the marked item')
@click.option('--steps', type=int, default=1, help='Circuit depth p')
@click.option('--eps1', type=float, default=0.1, help='Adiabatic accuracy parameter')
@click.option('--seed', type=int, default=42, help='Optimizer seed')
@click.option('--max-evals', type=int, default=500, help='Objective evaluation budget')
@click.option('--out', type=click.Path(), help='Write output to file')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')
def compare_cmd(n_qubits, marked, steps, eps1, seed, max_evals, out, verbose):
    """Closed-form angles against the Nelder-Mead baseline at equal depth."""
    _set_verbose(verbose)
    try:
        instance = SearchInstance(n_qubits=n_qubits, marked=marked)
        result = compare(instance, steps, eps1=eps1, seed=seed, max_evals=max_evals)
        data = result.to_dict()
        data["init"] = InitStrategy.CLOSED_FORM.value
        _emit(json.dumps(data, indent=2), out)
    except Exception as e:
        _fail(e, verbose)


@cli.command()
@click.option('--n-qubits', type=int, required=True, help='Number of qubits n (N = 2^n)')
@click.option('--points', type=int, default=1001, help='Grid points on s in [0, 1]')
@click.option('--out', type=click.Path(), help='Write output to file')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')
def gap(n_qubits, points, out, verbose):
    """Tabulate the spectrum of H(s) on a uniform s-grid."""
    _set_verbose(verbose)
    try:
        rows = gap_grid(2 ** n_qubits, points)
        if out:
            write_gap_csv(out, rows)
            click.echo(f"[+] Written to {out}")
        else:
            click.echo(gap_csv(rows).rstrip("\n"))
    except Exception as e:
        _fail(e, verbose)


@cli.command()
@click.option('--n-qubits', type=int, required=True, help='Number of qubits n (N = 2^n)')
@click.option('--eps1', type=float, default=0.1, help='Adiabatic accuracy parameter')
@click.option('--grid', type=int, default=1001, help='Time grid points on [0, T]')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output')
def margin(n_qubits, eps1, grid, verbose):
    """Check the local adiabatic condition along the continuous schedule."""
    _set_verbose(verbose)
    try:
        N = 2 ** n_qubits
        value = adiabatic_margin(N, eps1, grid)
        data = {"N": N, "eps1": eps1, "margin": value,
                "expected": eps1 * math.sqrt(1.0 - 1.0 / N)}
        click.echo(json.dumps(data, indent=2))
    except Exception as e:
        _fail(e, verbose)


def cli_main(argv=None) -> int:
    """Run the CLI on argv and return the process exit code."""
    try:
        rv = cli.main(args=argv, prog_name='ags-qaoa', standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except DomainError as e:
        click.echo(f"Error: {e}", err=True)
        return 1
    except OSError as e:
        click.echo(f"Error: {e}", err=True)
        return 2
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1
    return rv if isinstance(rv, int) else 0


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == '__main__':
    main()
