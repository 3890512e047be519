"""`lma loss` and `lma gradcheck`: the motion-weighted latent consistency loss."""

import argparse
import logging
from pathlib import Path

import numpy as np

from driverse.cli.common import add_output, add_seed, emit, manifest_tracks
from driverse.config import Settings
from driverse.exceptions import GradientCheckError, ParameterError
from driverse.services.manifest_service import ingest_manifest
from driverse.services.motion_alignment_service import (
    consistency_loss,
    gradient_check,
    motion_weights,
    random_instance,
    read_latents,
    read_tracks,
    sample_dynamic_points,
)

logger = logging.getLogger(__name__)


def loss(args: argparse.Namespace, settings: Settings) -> int:
    if args.tracks is not None:
        tracks = read_tracks(args.tracks)
    elif args.manifest is not None:
        tracks = manifest_tracks(args.manifest, ingest_manifest(args.manifest))
    else:
        raise ParameterError("lma loss needs --tracks or --manifest")
    latents = read_latents(args.latents, stride=args.stride)

    sampled = sample_dynamic_points(tracks, settings.motion_threshold, settings.num_points, settings.seed)
    weights = motion_weights(sampled)
    value = consistency_loss(latents, sampled, weights)
    logger.info("Consistency loss %.6g over %d tracks", value, sampled.num_tracks)
    emit(
        {
            "loss": value,
            "num_tracks": sampled.num_tracks,
            "track_ids": list(sampled.ids),
            "weights": [float(w) for w in weights.w],
            "stride": latents.stride,
        },
        args,
    )
    return 0


def gradcheck(args: argparse.Namespace, settings: Settings) -> int:
    errors = []
    for trial in range(args.trials):
        latents, tracks = random_instance(settings.seed + trial, stride=settings.stride)
        errors.append(gradient_check(latents, tracks, motion_weights(tracks), h=args.h))
    worst = float(np.max(errors))
    emit({"errors": errors, "max_error": worst, "tolerance": args.tolerance, "h": args.h}, args)
    if worst >= args.tolerance:
        raise GradientCheckError(f"gradient check failed: max relative error {worst:.3g} >= {args.tolerance:.3g}")
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    lma = subparsers.add_parser("lma", help="latent motion alignment")
    commands = lma.add_subparsers(dest="lma_command", required=True)

    parser = commands.add_parser("loss", help="evaluate the consistency loss")
    parser.add_argument("--latents", type=Path, required=True, help="raw float32 tensor with a .json sidecar")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--tracks", type=Path)
    source.add_argument("--manifest", type=Path, help="use the manifest's tracks_path")
    parser.add_argument("--stride", type=float, default=None, help="pixels per latent cell (default: sidecar)")
    parser.add_argument("--motion-threshold", dest="motion_threshold", type=float, default=None)
    parser.add_argument("--num-points", dest="num_points", type=int, default=None)
    add_seed(parser)
    add_output(parser)
    parser.set_defaults(handler=loss)

    parser = commands.add_parser("gradcheck", help="analytic vs finite-difference gradient")
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--step", dest="h", type=float, default=1e-4, help="central difference step h")
    parser.add_argument("--tolerance", type=float, default=1e-4)
    add_seed(parser)
    add_output(parser)
    parser.set_defaults(handler=gradcheck)
