"""Command-line entry point: modelbridge [--port ...] starts the service."""

import argparse

from .config import BridgeConfig
from .service import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="modelbridge",
        description="Serve victim and infiller models over the defense wire protocol",
    )
    parser.add_argument("--classifier", default="builtin",
                        help="'builtin' or a checkpoint path")
    parser.add_argument("--generator", default="builtin",
                        help="'builtin' or a checkpoint path")
    parser.add_argument("--infiller", default="builtin",
                        help="'builtin' or a checkpoint path")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--mask-token", default="<mask>")
    parser.add_argument("--max-length", type=int, default=256)
    parser.add_argument("--port", type=int, default=8200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    config = BridgeConfig(
        classifier=args.classifier,
        generator=args.generator,
        infiller=args.infiller,
        device=args.device,
        mask_token=args.mask_token,
        max_length=args.max_length,
        port=args.port,
        seed=args.seed,
    )
    serve(config)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
