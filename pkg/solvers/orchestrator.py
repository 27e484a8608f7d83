"""
Scenario Orchestrator with Logging and Metrics

Runs one scenario end to end (poles, instability, open-loop, closed-loop,
verify, sweep), writes its artifacts and a run summary, and returns a status
dict. Library errors never escape: they are logged and turned into
{"status": "error", ...} results carrying the module-qualified error code and
the process exit code.

Workflow per scenario:
1. Build grid / evolution settings from the resolved ScenarioConfig
2. Run the numerics, timing every stage in the global metrics tracker
3. Write CSV tables, gnuplot scripts and the JSON run summary

Every quantity is computed in scaled coordinates; rates are reported in
both systems.
"""
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from config import KGSTAB_LOG_FILE, KGSTAB_OUTPUT_DIR, KGSTAB_THREADS, LOG_LEVEL
from solvers.radial_core import TO_ORIGINAL, TO_SCALED, RadialGrid, RadialState
from solvers.spectral import (
    asymptotic_line,
    classify_instability_case,
    find_imaginary_poles,
    find_poles_in_strip,
)
from solvers.kernel_verify import run_verification_suite
from solvers.timedomain import (
    ClosedLoopConfig,
    EvolutionConfig,
    EvolutionMode,
    closed_loop_run,
    default_beta_target,
    linear_growth_run,
    open_loop_stabilize,
    uncontrolled_run,
    unstable_mode_state,
)
from tools.export_utils import emit_plots, poles_frame, to_jsonable, write_csv, write_summary
from tools.scenario_config import ScenarioConfig
from utils.errors import KgstabError
from utils.logging_config import get_logger, metrics_tracker, setup_logging

logger = get_logger("orchestrator")

BUMP_WIDTH = 0.3          # bump profile width as a fraction of L
VERIFY_BETA = 0.1


def _both_rates(rate: float) -> Dict[str, float]:
    return {"scaled": rate, "original": TO_ORIGINAL.convert_rate(rate)}


def _sweep_point(L_user: float, a: float, original: bool, fraction: float) -> Dict[str, Any]:
    """
    Spectral summary of one (L, a) sweep point.

    Module-level so the process pool can pickle it. Errors are recorded in
    the row rather than raised, so one bad point never sinks the sweep.
    """
    L = TO_SCALED.convert_length(L_user) if original else L_user
    beta_inf = asymptotic_line(L, a)
    row: Dict[str, Any] = {
        "L": L_user,
        "L_scaled": L,
        "a": a,
        "beta_inf_scaled": beta_inf,
        "beta_inf_original": TO_ORIGINAL.convert_rate(beta_inf),
        "case": 0,
        "s_max": math.nan,
        "imaginary_poles": "",
        "beta_target": math.nan,
        "n_poles": 0,
        "error": "",
    }
    try:
        row["case"] = classify_instability_case(L, a) or 0
        roots = find_imaginary_poles(L, a)
        row["imaginary_poles"] = ";".join(f"{s:.17g}" for s in roots)
        unstable = [s for s in roots if 0.0 < s < 1.0]
        if unstable:
            row["s_max"] = max(unstable)
        beta = default_beta_target(L, a, fraction)
        row["beta_target"] = beta
        row["n_poles"] = len(find_poles_in_strip(L, a, beta, 20.0 * math.pi / L))
    except KgstabError as e:
        row["error"] = e.code
    return row


class ScenarioOrchestrator:
    """
    Runs scenarios with step logging, metrics and artifact export.

    Attributes:
        output_dir (Path): Directory receiving CSVs, plot scripts and summaries
        max_workers (int): Process cap for the sweep scenario
        metrics (MetricsTracker): Global metrics tracker

    Example:
        >>> orchestrator = ScenarioOrchestrator(log_level="WARNING", output_dir="outputs")
        >>> result = orchestrator.run(resolve_config("poles", flag_values={"L": 1.0}))
        >>> result["exit_code"]
        0
    """

    def __init__(self, log_level: str = LOG_LEVEL, log_file: Optional[str] = KGSTAB_LOG_FILE,
                 output_dir: Optional[str] = None, max_workers: int = KGSTAB_THREADS):
        setup_logging(level=log_level, log_file=log_file)
        self.output_dir = Path(output_dir or KGSTAB_OUTPUT_DIR)
        self.max_workers = max(1, int(max_workers))
        self.metrics = metrics_tracker
        self._handlers: Dict[str, Callable[[ScenarioConfig], Dict[str, Any]]] = {
            "poles": self.run_poles,
            "instability": self.run_instability,
            "open-loop": self.run_open_loop,
            "closed-loop": self.run_closed_loop,
            "verify": self.run_verify,
            "sweep": self.run_sweep,
        }

        logger.info("=" * 60)
        logger.info("Scenario Orchestrator initialized")
        logger.info(f"Output directory: {self.output_dir}")
        logger.info(f"Sweep workers: {self.max_workers}")
        logger.info("=" * 60)

    # ------------------------------------------------------------------------
    # Entry point
    # ------------------------------------------------------------------------

    def run(self, config: ScenarioConfig) -> Dict[str, Any]:
        """
        Run one scenario and write its summary.

        Args:
            config (ScenarioConfig): Resolved configuration

        Returns:
            Dict[str, Any]: Summary with keys:
                - status: "success" | "diverged" | "failed" | "error"
                - exit_code: 0, 2 or 3
                - results / artifacts / metrics: scenario output
                - summary_path: path of the written summary JSON (when writable)
                - message: One-line human readable outcome
        """
        self.metrics.reset()
        start_time = time.time()
        slug = config.scenario.replace("-", "_")

        logger.info("=" * 60)
        logger.info(f"Starting scenario: {config.scenario}")
        logger.info(f"L = {config['L']}, a = {config['a']} ({config['coordinates']} coordinates)")
        logger.info("=" * 60)

        try:
            outcome = self._handlers[config.scenario](config)
            status = outcome.get("status", "success")
            exit_code = 3 if status == "failed" else 0
            summary = {
                "scenario": config.scenario,
                "status": status,
                "exit_code": exit_code,
                "config": config.values,
                "results": outcome["results"],
                "artifacts": outcome["artifacts"],
            }
            if "error" in outcome:
                summary["error"] = outcome["error"]
            message = f"[OK] {config.scenario} finished with status {status}"
        except KgstabError as e:
            logger.error(f"Scenario {config.scenario} failed: {e.code}: {e}", exc_info=True)
            self.metrics.record("errors", 1, {"scenario": config.scenario, "code": e.code})
            summary = self._error_summary(config, e.to_dict(), e.exit_code)
            message = f"[ERROR] {e.code}: {e}"
        except ValueError as e:
            logger.error(f"Scenario {config.scenario} rejected its arguments: {e}", exc_info=True)
            self.metrics.record("errors", 1, {"scenario": config.scenario, "code": "cli.invalid_argument"})
            summary = self._error_summary(config, {"code": "cli.invalid_argument", "error": str(e)}, 2)
            message = f"[ERROR] Invalid argument: {e}"
        except Exception as e:
            logger.error(f"Scenario {config.scenario} crashed: {e}", exc_info=True)
            self.metrics.record("errors", 1, {"scenario": config.scenario, "code": "kgstab.internal"})
            summary = self._error_summary(config, {"code": "kgstab.internal", "error": str(e)}, 3)
            message = f"[ERROR] Failed: {e}"

        total_time = time.time() - start_time
        self.metrics.record("scenario_total_time", total_time, {"scenario": config.scenario})
        summary["metrics"] = self.metrics.get_summary()

        summary_path = self.output_dir / f"{slug}_summary.json"
        try:
            write_summary(summary, summary_path)
            summary["summary_path"] = str(summary_path)
        except KgstabError as e:
            logger.error(f"Could not write run summary: {e}")
            summary.update(status="error", exit_code=e.exit_code, error=e.to_dict())
            message = f"[ERROR] {e.code}: {e}"

        logger.info("=" * 60)
        logger.info(f"Scenario {config.scenario} done in {total_time:.2f}s: {summary['status']}")
        logger.info("=" * 60)
        summary["message"] = message
        return summary

    def _error_summary(self, config: ScenarioConfig, error: Dict[str, Any], exit_code: int) -> Dict[str, Any]:
        return {
            "scenario": config.scenario,
            "status": "error",
            "exit_code": exit_code,
            "config": config.values,
            "results": {},
            "artifacts": [],
            "error": error,
        }

    # ------------------------------------------------------------------------
    # Shared setup
    # ------------------------------------------------------------------------

    def _evolution_config(self, config: ScenarioConfig) -> EvolutionConfig:
        grid = RadialGrid(config.length(), config["n_points"])
        mode = EvolutionMode.NONLINEAR_SHIFTED if config["mode"] == "nonlinear" else EvolutionMode.LINEARIZED
        return EvolutionConfig.with_cfl(grid, config["a"], config["cfl"], mode=mode,
                                        T_end=config.time("T_end"), record_every=config["record_every"])

    def _initial_state(self, config: ScenarioConfig, grid: RadialGrid) -> RadialState:
        epsilon = config["epsilon"]
        if config["profile"] == "unstable_mode":
            unstable = [s for s in find_imaginary_poles(grid.L, config["a"]) if 0.0 < s < 1.0]
            if unstable:
                return unstable_mode_state(grid, max(unstable), epsilon)
            logger.warning("No unstable imaginary pole; using the bump profile instead")
        width = BUMP_WIDTH * grid.L
        return RadialState.from_profiles(grid, lambda r: epsilon * np.exp(-(r / width) ** 2))

    def _beta_target(self, config: ScenarioConfig) -> float:
        beta = config.rate("beta")
        if beta is not None:
            return beta
        return default_beta_target(config.length(), config["a"], config["beta_fraction"])

    def _alpha_max(self, config: ScenarioConfig) -> float:
        alpha_max = config.rate("alpha_max")
        return alpha_max if alpha_max is not None else 20.0 * math.pi / config.length()

    def _write_history(self, config: ScenarioConfig, frame: pd.DataFrame, name: str) -> List[str]:
        path = write_csv(frame, self.output_dir / name)
        artifacts = [path.name]
        if config["plots"]:
            artifacts += [p.name for p in emit_plots(path)]
        return artifacts

    # ------------------------------------------------------------------------
    # Scenarios
    # ------------------------------------------------------------------------

    def run_poles(self, config: ScenarioConfig) -> Dict[str, Any]:
        """Poles in the strip 0 <= Im w <= beta_max plus the imaginary poles."""
        L, a = config.length(), config["a"]
        beta_inf = asymptotic_line(L, a)
        beta_max = config.rate("beta_max")
        beta_max = beta_max if beta_max is not None else 0.9 * beta_inf
        alpha_max = self._alpha_max(config)

        logger.info(f"Step 1/2: Searching poles (beta_max = {beta_max:.6g}, alpha_max = {alpha_max:.6g})...")
        step_start = time.time()
        poles = find_poles_in_strip(L, a, beta_max, alpha_max)
        roots = find_imaginary_poles(L, a)
        elapsed = time.time() - step_start
        self.metrics.record("pole_search_time", elapsed, {"L": L, "a": a})
        logger.info(f"  Found {len(poles)} poles and {len(roots)} imaginary poles ({elapsed:.2f}s)")

        logger.info("Step 2/2: Writing pole table...")
        path = write_csv(poles_frame(poles), self.output_dir / "poles.csv")

        return {
            "results": {
                "beta_inf": _both_rates(beta_inf),
                "beta_max": _both_rates(beta_max),
                "alpha_max": alpha_max,
                "n_poles": len(poles),
                "imaginary_poles": roots,
                "instability_case": classify_instability_case(L, a),
                "poles": [p.omega for p in poles],
                "frequencies": "scaled",
            },
            "artifacts": [path.name],
        }

    def run_instability(self, config: ScenarioConfig) -> Dict[str, Any]:
        """Linearized free run from the most unstable mode; growth vs the imaginary pole."""
        evolution = self._evolution_config(config)
        L, a = evolution.grid.L, evolution.a

        logger.info("Step 1/2: Simulating the uncontrolled linearized run...")
        step_start = time.time()
        growth = linear_growth_run(evolution, amplitude=config["epsilon"],
                                   window=(1.0, evolution.T_end))
        elapsed = time.time() - step_start
        self.metrics.record("simulation_time", elapsed, {"scenario": "instability"})
        logger.info(f"  Growth {growth.rate_measured:.6g} vs s = {growth.s_expected:.6g} "
                    f"(relative error {growth.relative_error:.2%})")

        logger.info("Step 2/2: Writing history...")
        artifacts = self._write_history(config, growth.history.to_frame(), "instability_history.csv")

        return {
            "status": "diverged" if growth.diverged else "success",
            "results": {
                "instability_case": classify_instability_case(L, a),
                "imaginary_poles": growth.imaginary_poles,
                "s_expected": _both_rates(growth.s_expected),
                "rate_measured": _both_rates(growth.rate_measured),
                "relative_error": growth.relative_error,
                "r_squared": growth.r_squared,
                "diverged": growth.diverged,
            },
            "artifacts": artifacts,
        }

    def run_open_loop(self, config: ScenarioConfig) -> Dict[str, Any]:
        """Open-loop stabilization next to its uncontrolled twin."""
        evolution = self._evolution_config(config)
        grid = evolution.grid
        beta = self._beta_target(config)
        window = (config.time("window_start"), evolution.T_end)
        initial = self._initial_state(config, grid)

        logger.info(f"Step 1/4: Searching poles below beta = {beta:.6g}...")
        step_start = time.time()
        poles = find_poles_in_strip(grid.L, evolution.a, beta, self._alpha_max(config))
        self.metrics.record("pole_search_time", time.time() - step_start, {"scenario": "open-loop"})
        logger.info(f"  {len(poles)} poles to cancel")

        logger.info("Step 2/4: Running the uncontrolled twin...")
        step_start = time.time()
        twin_history, twin_fit, twin_diverged = uncontrolled_run(initial, evolution, window)
        self.metrics.record("simulation_time", time.time() - step_start, {"run": "twin"})

        logger.info("Step 3/4: Synthesizing and applying the control...")
        step_start = time.time()
        run = open_loop_stabilize(initial, evolution, beta, poles=poles, picard_tol=config["picard_tol"],
                                  max_picard=config["max_picard"], window=window)
        self.metrics.record("simulation_time", time.time() - step_start, {"run": "controlled"})
        self.metrics.record("picard_iterations", run.picard_iters)
        rate = run.decay_fit.rate
        logger.info(f"  Decay rate {rate:.6g} vs target {beta:.6g}, r^2 = {run.decay_fit.r_squared:.4f}")

        logger.info("Step 4/4: Writing histories...")
        artifacts = self._write_history(config, run.history.to_frame(), "open_loop_history.csv")
        artifacts += self._write_history(config, twin_history.to_frame(), "open_loop_twin_history.csv")
        artifacts.append(write_csv(run.control.to_frame(), self.output_dir / "open_loop_control.csv").name)

        return {
            "results": {
                "beta_target": _both_rates(beta),
                "beta_inf": _both_rates(asymptotic_line(grid.L, evolution.a)),
                "rate_measured": _both_rates(rate),
                "relative_error": abs(rate - beta) / beta,
                "r_squared": run.decay_fit.r_squared,
                "n_poles": len(run.poles_cancelled),
                "picard_iters": run.picard_iters,
                "picard_distances": run.picard_distances,
                "converged": run.converged,
                "c_beta": run.c_beta,
                "coefficient_gain": run.coefficient_gain,
                "coefficient_bound_ok": run.coefficient_bound_ok,
                "smallness_ok": run.smallness_ok,
                "coefficients": run.control.coefficients,
                "twin_rate": _both_rates(twin_fit.rate),
                "twin_diverged": twin_diverged,
            },
            "artifacts": artifacts,
        }

    def run_closed_loop(self, config: ScenarioConfig) -> Dict[str, Any]:
        """Periodic observer feedback over n_periods, with an optional kick."""
        evolution = self._evolution_config(config)
        grid = evolution.grid
        beta = self._beta_target(config)
        clconfig = ClosedLoopConfig(
            T_beta=config.time("T_beta"),
            epsilon0=config.rate("epsilon0"),
            observer=config["observer"],
            n_periods=config["n_periods"],
            kick_period=config["kick_period"],
            kick_factor=config["kick_factor"],
        )
        initial = self._initial_state(config, grid)

        logger.info(f"Step 1/2: Running {clconfig.n_periods} feedback periods (beta = {beta:.6g})...")
        step_start = time.time()
        result = closed_loop_run(initial, evolution, clconfig, beta, alpha_max=self._alpha_max(config))
        self.metrics.record("simulation_time", time.time() - step_start, {"scenario": "closed-loop"})
        contractions = [record.contraction for record in result.periods]
        logger.info(f"  Contractions per period: {', '.join(f'{c:.4g}' for c in contractions)}")

        logger.info("Step 2/2: Writing histories...")
        artifacts = self._write_history(config, result.history.to_frame(), "closed_loop_history.csv")
        periods = pd.DataFrame({
            "index": [r.index for r in result.periods],
            "start_time": [r.start_time for r in result.periods],
            "h1_start": [r.h1_start for r in result.periods],
            "h1_end": [r.h1_end for r in result.periods],
            "contraction": contractions,
            "coefficient_l1": [float(np.sum(np.abs(r.coefficients))) for r in result.periods],
        })
        artifacts.append(write_csv(periods, self.output_dir / "closed_loop_periods.csv").name)

        bound = result.contraction_bound
        return {
            "results": {
                "beta_target": _both_rates(beta),
                "epsilon0": _both_rates(result.epsilon0),
                "T_beta": {"scaled": result.T_beta, "original": TO_ORIGINAL.convert_time(result.T_beta)},
                "n_poles": len(result.poles),
                "contractions": contractions,
                "contraction_bound": bound,
                "bound_met_after_first": all(c <= 1.15 * bound for c in contractions[1:]),
                "period_fit_slope": result.period_fit_slope,
                "kick_period": clconfig.kick_period,
            },
            "artifacts": artifacts,
        }

    def run_verify(self, config: ScenarioConfig) -> Dict[str, Any]:
        """Kernel, Hilbert and expansion checks; any failed check fails the run."""
        L, a = config.length(), config["a"]
        beta = config.rate("beta")
        if beta is None:
            beta = min(VERIFY_BETA, 0.5 * asymptotic_line(L, a))

        logger.info("Step 1/2: Running the verification suite...")
        report = run_verification_suite(L=L, a=a, beta=beta, A=config["A"], seed=config["seed"])
        failed = [check.name for check in report.checks if not check.passed]
        logger.info(f"  {len(report.checks) - len(failed)}/{len(report.checks)} checks passed")
        for name in failed:
            logger.warning(f"  Check failed: {name}")

        logger.info("Step 2/2: Writing check table...")
        frame = pd.DataFrame([check.to_dict() for check in report.checks])
        path = write_csv(frame, self.output_dir / "verify_checks.csv")

        outcome: Dict[str, Any] = {
            "status": "success" if report.all_passed else "failed",
            "results": report.to_dict(),
            "artifacts": [path.name],
        }
        if failed:
            outcome["error"] = {"code": "kernel_verify.check_failed",
                                "error": f"{len(failed)} checks failed: {', '.join(failed)}"}
        return outcome

    def run_sweep(self, config: ScenarioConfig) -> Dict[str, Any]:
        """Spectral summary over the sweep_L x sweep_a grid, fanned out over processes."""
        points = [(L, a) for L in config["sweep_L"] for a in config["sweep_a"]]
        workers = min(self.max_workers, len(points))

        logger.info(f"Step 1/2: Sweeping {len(points)} (L, a) points on {workers} workers...")
        step_start = time.time()
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(
                _sweep_point,
                [L for L, _ in points],
                [a for _, a in points],
                [config.original] * len(points),
                [config["beta_fraction"]] * len(points),
            ))
        elapsed = time.time() - step_start
        self.metrics.record("sweep_time", elapsed, {"points": len(points), "workers": workers})
        errors = [row for row in rows if row["error"]]
        logger.info(f"  Sweep done in {elapsed:.2f}s ({len(errors)} points with errors)")

        logger.info("Step 2/2: Writing sweep table...")
        path = write_csv(pd.DataFrame(rows), self.output_dir / "sweep.csv")

        return {
            "results": {"points": rows, "n_points": len(rows), "n_errors": len(errors)},
            "artifacts": [path.name],
        }

    # ------------------------------------------------------------------------
    # Metrics
    # ------------------------------------------------------------------------

    def get_metrics_summary(self) -> Dict[str, Any]:
        """Log and return the metrics summary of the last run."""
        summary = self.metrics.get_summary()
        logger.info("=" * 60)
        logger.info("METRICS SUMMARY")
        logger.info("=" * 60)
        for metric_name, stats in summary.items():
            logger.info(f"{metric_name}:")
            logger.info(f"  Average: {stats['average']:.3f}")
            logger.info(f"  Min: {stats['min']:.3f}")
            logger.info(f"  Max: {stats['max']:.3f}")
            logger.info(f"  Count: {stats['count']}")
        return to_jsonable(summary)


if __name__ == "__main__":
    from tools.scenario_config import resolve_config

    orchestrator = ScenarioOrchestrator(log_level="INFO")
    result = orchestrator.run(resolve_config("poles", flag_values={"L": 1.0, "a": 0.5}))
    print(result["message"])
    orchestrator.get_metrics_summary()
