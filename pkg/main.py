import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

# --- Import Core Application Components ---
from config.settings import PipelineConfig, config_to_dict, get_config, load_config
from config.version import get_version_string
from data.containers import (
    read_hom_csv, read_jsi_csv, write_histogram, write_hom_csv, write_jsa, write_jsa_csv, write_jsi_csv,
    write_pgm, write_residuals_csv, write_sign_csv, write_timetags, write_timetags_csv,
)
from data.reports import read_json, write_json, write_schmidt_report
from hom.fitting import FitResult, fit_interferogram, initial_guess
from hom.model import CurveKind, HomCurve, HomFitParams, confidence_band, hom_from_jsa, pcc_analytic
from inference.disambiguation import disambiguate_phase
from inference.montecarlo import counts_from_jsi, monte_carlo_schmidt
from inference.phase_mask import build_phase_mask, jsa_from_jsi
from schmidt.decomposition import decompose
from spectral.jsa import build_state, jsi_of
from spectral.lobes import (
    SpectralImage, detect_lobes, jsi_on_wavelengths, normalized_cross_correlation, resample_to_grid,
)
from tofs.histogram import bin_coincidences, reconstruct_jsi
from tofs.sampling import sample_pairs
from tofs.spectrometer import check_spectral_range
from tofs.timetags import simulate_timetags
from utils.errors import Ambiguous, ConfigError, DegenerateCenters, NoConvergence, ToolkitError
from utils.logger import logger

# smoothing applied before counting lobes of a shot-noise limited reconstruction
RECONSTRUCTION_SMOOTHING_BINS = 2.0


def _output_dir(args, config: PipelineConfig) -> Path:
    out = Path(args.out or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed(args, config: PipelineConfig) -> int:
    return int(args.seed) if args.seed is not None else int(config.monte_carlo.seed)


# --- Subcommands ---

def cmd_simulate(args, config: PipelineConfig) -> int:
    """Model JSA, JSI exports and Schmidt decomposition."""
    out = _output_dir(args, config)
    grid = config.grid.build()
    jsa = build_state(config.state, grid)

    write_jsa(out / "jsa.bin", jsa)
    write_jsa_csv(out / "jsa.csv", jsa)
    image = SpectralImage.from_jsa(jsa)
    write_jsi_csv(out / "jsi.csv", image)
    write_pgm(out / "jsi.pgm", image.intensity)

    decomposition = decompose(jsa)
    write_schmidt_report(out, decomposition)
    centroid1, centroid2 = jsa.centroid_wavelengths()

    logger.info(f"simulated {grid.n_points}x{grid.n_points} state, phi_p = {config.state.phase_phi_p:.4f}",
                module="CLI")
    print(f"K = {decomposition.schmidt_number:.4f}")
    print(f"centroids: {centroid1:.3f} nm / {centroid2:.3f} nm")
    return 0


def cmd_tofs(args, config: PipelineConfig) -> int:
    """Time-of-flight spectrometer run on the model state."""
    out = _output_dir(args, config)
    seed = _seed(args, config)
    grid = config.grid.build()
    tofs = config.tofs
    check_spectral_range(tofs, config.grid.span)

    jsa = build_state(config.state, grid)
    pairs = sample_pairs(jsi_of(jsa), grid, grid, int(args.pairs), seed)
    stream = simulate_timetags(pairs, tofs, seed)
    write_timetags(out / "timetags.bin", stream)
    write_timetags_csv(out / "timetags.csv", stream)

    histogram = bin_coincidences(stream, tofs)
    write_histogram(out / "histogram.bin", histogram)
    image = reconstruct_jsi(histogram, tofs)
    write_jsi_csv(out / "jsi_reconstructed.csv", image)
    write_pgm(out / "jsi_reconstructed.pgm", image.intensity)

    reference = jsi_on_wavelengths(jsa, image.wavelengths1, image.wavelengths2)
    correlation = normalized_cross_correlation(image.intensity, reference)
    lobes = detect_lobes(image, count=None, smoothing_bins=RECONSTRUCTION_SMOOTHING_BINS)

    write_json(out / "tofs.json", {
        "pairs": int(args.pairs),
        "seed": seed,
        "stats": histogram.stats.to_dict(),
        "correlation": correlation,
        "lobes": [list(lobe.center) for lobe in lobes],
        "implied_range_nm": tofs.implied_range_nm,
        "resolution_nm": tofs.resolution_nm,
    })
    print(f"coincidences: {histogram.stats.coincidences}")
    print(f"correlation with model JSI: {correlation:.4f}")
    print(f"lobes: {len(lobes)}")
    print(f"implied spectral range: {tofs.implied_range_nm:.2f} nm")
    return 0


def cmd_hom(args, config: PipelineConfig) -> int:
    """Closed-form HOM curves with shot-noise bands, plus the numeric curve of the model state."""
    out = _output_dir(args, config)
    grid = config.grid.build()
    state = config.state
    hom = config.hom
    delays = hom.delays()
    phis = args.phi if args.phi else hom.phis

    for phi in phis:
        params = HomFitParams(N=hom.normalization_counts, V=1.0, delta=state.bin_spacing,
                              sigma=state.bin_width_omega, phi=float(phi))
        counts = np.clip(pcc_analytic(params, delays), 0.0, None)
        lower, upper = confidence_band(params, delays, float(np.sum(counts)), hom.k_sigma)
        simulated = hom_from_jsa(build_state(replace(state, phase_phi_p=float(phi)), grid), delays)

        name = f"hom_phi_{float(phi):.4f}.csv"
        write_hom_csv(out / name, HomCurve(delays, counts, CurveKind.COUNTS), extra={
            "lower": lower,
            "upper": upper,
            "simulated": simulated.values * hom.normalization_counts,
        })
        logger.info(f"wrote {name}", module="CLI")
        print(f"phi = {float(phi):.4f}: p(0) = {counts[np.argmin(np.abs(delays))] / hom.normalization_counts:.4f}")
    return 0


def _parse_bounds(items):
    bounds = {}
    for item in items or []:
        try:
            name, span = item.split("=", 1)
            lo, hi = span.split(":", 1)
            bounds[name.strip()] = (float(lo), float(hi))
        except ValueError:
            raise ConfigError(f"bad --bound '{item}', expected NAME=LO:HI")
    return bounds


def cmd_fit(args, config: PipelineConfig) -> int:
    """Fit the closed-form interferogram to a HOM CSV."""
    out = _output_dir(args, config)
    curve = read_hom_csv(args.data)

    init = initial_guess(curve)
    overrides = {name: getattr(args, f"init_{name}") for name in ("N", "V", "delta", "sigma", "phi")}
    init = replace(init, **{k: v for k, v in overrides.items() if v is not None})

    try:
        result = fit_interferogram(curve, init=init, bounds=_parse_bounds(args.bound))
    except NoConvergence as e:
        if e.result is not None:
            write_json(out / "fit.json", e.result.to_dict())
        raise

    write_json(out / "fit.json", result.to_dict())
    write_residuals_csv(out / "fit_residuals.csv", curve, pcc_analytic(result.params, curve.delays))

    p, err = result.params, result.standard_errors
    print(f"phi = {p.phi:.4f} +/- {err['phi']:.4f} rad")
    print(f"V = {p.V:.4f} +/- {err['V']:.4f}, delta = {p.delta:.4f} +/- {err['delta']:.4f} rad/ps, "
          f"sigma = {p.sigma:.4f} +/- {err['sigma']:.4f} rad/ps")
    return 0


def cmd_infer(args, config: PipelineConfig) -> int:
    """Phase mask, Monte Carlo Schmidt number and phase disambiguation from a JSI and a HOM fit."""
    out = _output_dir(args, config)
    settings = config.inference
    grid = config.grid.build()

    measured = read_jsi_csv(args.jsi)
    jsi = resample_to_grid(measured, grid, grid)
    image = SpectralImage(jsi, grid.wavelengths, grid.wavelengths)
    lobes = detect_lobes(image, count=4, threshold=settings.threshold, radius_nm=settings.nms_radius_nm,
                         smoothing_bins=settings.smoothing_bins)
    if len(lobes) < 4:
        raise DegenerateCenters(f"found {len(lobes)} lobes, need 4")

    mask = build_phase_mask(grid, grid, [lobe.center for lobe in lobes], settings.bin_symmetry)
    jsa = jsa_from_jsi(jsi, mask, grid, grid)
    write_jsa(out / "jsa_inferred.bin", jsa)
    write_sign_csv(out / "mask.csv", mask.signs)
    direct_k = decompose(jsa).schmidt_number

    rounds = int(args.rounds or config.monte_carlo.rounds)
    seed = _seed(args, config)
    counts = counts_from_jsi(jsi, config.monte_carlo.total_counts)
    estimate = monte_carlo_schmidt(counts, mask, rounds, seed)

    fit = FitResult.from_dict(read_json(args.fit))
    candidates = args.phi if args.phi else settings.candidate_phis
    report = {
        "lobes": [list(lobe.center) for lobe in lobes],
        "mask": {"symmetry": mask.symmetry.value, "nodes": list(mask.nodes)},
        "schmidt_number": direct_k,
        "k_estimate": estimate.to_dict(),
        "fit": {"phi": fit.params.phi, "phi_err": fit.standard_errors["phi"]},
        "config": config_to_dict(config),
    }

    try:
        disambiguation = disambiguate_phase(candidates, fit.params.phi, fit.standard_errors["phi"],
                                            config.state, grid, measured_jsi=jsi,
                                            confidence=settings.confidence)
    except Ambiguous as e:
        report["disambiguation"] = e.report.to_dict() if e.report else None
        write_json(out / "report.json", report)
        raise

    report["disambiguation"] = disambiguation.to_dict()
    write_json(out / "report.json", report)
    print(f"K = {estimate.mean:.4f} +/- {estimate.bound:.4f}")
    print(f"phi_p = {disambiguation.selected_phi:.4f} rad")
    return 0


# --- Entry point ---

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration (defaults to config/defaults.json)")
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("--seed", type=int, help="random seed (overrides monte_carlo.seed)")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="bst", description=get_version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common], help="model JSA, JSI and Schmidt decomposition")

    tofs = sub.add_parser("tofs", parents=[common], help="time-of-flight spectrometer simulation")
    tofs.add_argument("--pairs", type=int, default=1_000_000)

    hom = sub.add_parser("hom", parents=[common], help="theory HOM curves")
    hom.add_argument("--phi", type=float, nargs="+", help="bin-map phases (rad)")

    fit = sub.add_parser("fit", parents=[common], help="fit a HOM interferogram")
    fit.add_argument("data", help="HOM CSV (delay_ps, counts)")
    for name in ("N", "V", "delta", "sigma", "phi"):
        fit.add_argument(f"--init-{name}", dest=f"init_{name}", type=float)
    fit.add_argument("--bound", action="append", metavar="NAME=LO:HI")

    infer = sub.add_parser("infer", parents=[common], help="phase mask, K estimate and phase disambiguation")
    infer.add_argument("--jsi", required=True, help="JSI CSV (wavelength1_nm, wavelength2_nm, intensity)")
    infer.add_argument("--fit", required=True, help="fit.json from the fit subcommand")
    infer.add_argument("--rounds", type=int)
    infer.add_argument("--phi", type=float, nargs="+", help="candidate bin-map phases (rad)")
    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "tofs": cmd_tofs,
    "hom": cmd_hom,
    "fit": cmd_fit,
    "infer": cmd_infer,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logger.set_level(logging.DEBUG)
    try:
        config = load_config(args.config) if args.config else get_config()
        logger.info(f"{get_version_string()} {args.command}: {config.grid.n_points}-point grid over "
                    f"{config.grid.span} nm at {config.grid.center_wavelength} nm", module="CLI")
        return COMMANDS[args.command](args, config)
    except ToolkitError as e:
        logger.error(str(e), module="CLI")
        return e.exit_code
    except Exception as e:
        logger.error(f"unexpected failure: {e}", module="CLI")
        return 1


if __name__ == "__main__":
    sys.exit(main())
