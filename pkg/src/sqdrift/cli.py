"""Command line entry point: ``sqdrift run|fci|map``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .determinant import hartree_fock_determinant
from .errors import SqdriftError
from .hamiltonian import hf_energy, read_fcidump


def _cmd_run(args):
    from .driver import RunConfig, run_pipeline

    cfg = RunConfig.from_json(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out_dir is not None:
        cfg.output_dir = args.out_dir
    if args.workers is not None:
        cfg.workers = args.workers
    result = run_pipeline(cfg)
    for s in result.spaces:
        print(f"{s.label}: E = {s.energy:.10f}  E_corr = {s.correlation_energy:.10f}  dim = {s.dimension}")
    print(f"wrote {cfg.output_dir}/result.json")


def _cmd_fci(args):
    from .subspace import fci_oracle

    ham = read_fcidump(args.fcidump)
    res = fci_oracle(ham)
    e_hf = hf_energy(ham, hartree_fock_determinant(ham.n_orbitals, ham.n_alpha, ham.n_beta))
    print(json.dumps({
        "fci_energy": res.ground_energy,
        "hf_energy": e_hf,
        "correlation_energy": res.ground_energy - e_hf,
        "dimension": res.basis.dimension,
    }, indent=2))


def _cmd_map(args):
    from .pauli import jordan_wigner, lambda_norm

    ham = read_fcidump(args.fcidump)
    pauli = jordan_wigner(ham, args.ordering, args.threshold)
    text = pauli.export(args.output)
    if args.output is None:
        sys.stdout.write(text)
    print(
        f"# {len(pauli)} terms, lambda = {lambda_norm(pauli):.12g}, dropped weight = {pauli.dropped_weight:.3g}",
        file=sys.stderr,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqdrift", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a pipeline from a JSON config")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--out-dir")
    run.add_argument("--workers", type=int)
    run.set_defaults(func=_cmd_run)

    fci = sub.add_parser("fci", help="exact ground energy of an FCIDUMP")
    fci.add_argument("fcidump")
    fci.set_defaults(func=_cmd_fci)

    mp = sub.add_parser("map", help="dump the Jordan-Wigner Pauli terms")
    mp.add_argument("fcidump")
    mp.add_argument("--ordering", choices=("blocked", "interleaved"), default="blocked")
    mp.add_argument("--threshold", type=float, default=1e-12)
    mp.add_argument("-o", "--output")
    mp.set_defaults(func=_cmd_map)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except SqdriftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
