"""Command-line surface.

    lmgc compress   --in g.f32 --out g.lmgc --scheme hex:space:4 --model order2 --window 2048
    lmgc decompress --in g.lmgc --out g.f32
    lmgc bench      --config grid.json --out report.csv
    lmgc synth      --spec spec.json --seed 7 --out g.f32
    lmgc inspect    --in g.lmgc

Precedence for bench settings: built-in defaults < config file < flags.
Exit codes: 0 success, 2 verification failure, 3 config/format error,
4 bridge unavailable. The bridge endpoint comes from --bridge or the
LMGC_BRIDGE environment variable.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, bench, coder, pipeline
from .coder.bitstream import parse as parse_bitstream
from .errors import BridgeUnavailableError, ConfigError, FormatError, VerificationError
from .serializer import SerializationScheme, parse_scheme, serialize
from .tensor_io import GeneratorSpec, load_blob, load_manifest, synth_gradients

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_CONFIG = 3
EXIT_BRIDGE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmgc", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"lmgc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress a raw .f32 blob")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--scheme", default="hex:space:4")
    p.add_argument("--model", default="order2", help="uniform, order0..order3 or bridge")
    p.add_argument("--window", type=int, default=pipeline.DEFAULT_WINDOW_SIZE)
    p.add_argument("--precision", type=int, default=16, help="PMF precision bits (built-in models)")
    p.add_argument("--bridge", default=None, help="bridge endpoint (host:port or stdio:<cmd>)")
    p.add_argument("--no-verify", action="store_true", help="skip the decode-and-compare check")

    p = sub.add_parser("decompress", help="reconstruct the original bytes")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--bridge", default=None)

    p = sub.add_parser("bench", help="run an experiment grid")
    p.add_argument("--config", default=None, help="grid JSON")
    p.add_argument("--manifest", default=None, help="corpus manifest (alternative to --config)")
    p.add_argument("--out", dest="outfile", required=True, help="CSV report path")
    p.add_argument("--json", dest="json_out", default=None, help="JSON sidecar path")
    p.add_argument("--schemes", default=None, help="comma-separated scheme list")
    p.add_argument("--models", default=None)
    p.add_argument("--windows", default=None)
    p.add_argument("--lossy", default=None)
    p.add_argument("--baselines", default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--subsample", type=int, default=None)
    p.add_argument("--bridge", default=None)

    p = sub.add_parser("synth", help="generate a synthetic gradient blob")
    p.add_argument("--spec", default=None, help="generator spec JSON file")
    p.add_argument("--layers", default=None, help="comma-separated layer sizes")
    p.add_argument("--scales", default=None, help="comma-separated per-layer scales")
    p.add_argument("--distribution", default="gaussian", choices=["gaussian", "laplace"])
    p.add_argument("--sparsity", type=float, default=0.0)
    p.add_argument("--mantissa-bits", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", dest="outfile", required=True)

    p = sub.add_parser("inspect", help="describe a bitstream, blob or manifest")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--dump-text", action="store_true", help="print serialized text of a blob")
    p.add_argument("--scheme", default="hex:space:4")
    p.add_argument("--limit", type=int, default=256, help="bytes of the blob to dump")
    return parser


def _cmd_compress(args) -> int:
    blob = load_blob(args.infile)
    scheme = parse_scheme(args.scheme)
    model = bench.make_model(args.model, scheme, args.bridge, args.precision)
    compressed = pipeline.compress(blob, scheme, model, args.window)
    if not args.no_verify:
        if pipeline.decompress(compressed, model=model) != blob.data:
            print("verification failed: decode does not reproduce the input", file=sys.stderr)
            return EXIT_VERIFY
    with open(args.outfile, "wb") as fh:
        fh.write(compressed)
    rate = bench.compression_rate(max(len(blob.data), 1), len(compressed))
    print(f"{args.infile}: {len(blob.data)} -> {len(compressed)} bytes ({rate:.2f}%)")
    return EXIT_OK


def _cmd_decompress(args) -> int:
    with open(args.infile, "rb") as fh:
        data = fh.read()
    raw = pipeline.decompress(data, bridge_endpoint=args.bridge)
    with open(args.outfile, "wb") as fh:
        fh.write(raw)
    print(f"{args.infile}: restored {len(raw)} bytes")
    return EXIT_OK


def _split(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _cmd_bench(args) -> int:
    doc = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
    if args.manifest:
        doc.setdefault("corpus", {})["manifest"] = args.manifest
    # flags override the config file
    if args.schemes:
        doc["schemes"] = _split(args.schemes)
    if args.models:
        doc["models"] = _split(args.models)
    if args.windows:
        doc["window_sizes"] = [int(w) for w in _split(args.windows)]
    if args.lossy:
        doc["lossy"] = _split(args.lossy)
    if args.baselines:
        doc["baselines"] = _split(args.baselines)
    if args.repeats is not None:
        doc["repeats"] = args.repeats
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.subsample is not None:
        doc["subsample"] = args.subsample
    if args.bridge is not None:
        doc["bridge_endpoint"] = args.bridge
    config = bench.config_from_json(doc)
    rows = bench.run_experiment(config)
    bench.write_csv(rows, args.outfile)
    if args.json_out:
        bench.write_json(config, rows, args.json_out)
    done = sum(1 for r in rows if r.status == "ok")
    skipped = len(rows) - done
    print(f"{len(rows)} rows ({done} ok, {skipped} skipped) -> {args.outfile}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    if args.spec:
        with open(args.spec) as fh:
            spec = GeneratorSpec.from_json(json.load(fh))
    elif args.layers:
        spec = GeneratorSpec(
            layer_sizes=tuple(int(n) for n in _split(args.layers)),
            scale_per_layer=tuple(float(s) for s in _split(args.scales)) if args.scales else (1.0,),
            distribution=args.distribution,
            sparsity_fraction=args.sparsity,
            mantissa_bits=args.mantissa_bits,
        )
    else:
        raise ConfigError("synth needs --spec or --layers")
    blob = synth_gradients(spec, args.seed)
    blob.write(args.outfile)
    print(f"{args.outfile}: {blob.element_count} floats ({len(blob.data)} bytes)")
    return EXIT_OK


def _cmd_inspect(args) -> int:
    path = args.infile
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == b"LMGC":
        with open(path, "rb") as fh:
            header, payload, bitlens = parse_bitstream(fh.read())
        scheme = SerializationScheme.from_tag(header.scheme_tag)
        print(json.dumps({
            "kind": "bitstream",
            "scheme": scheme.spec_string(),
            "model_id": f"0x{header.model_id:02x}",
            "model_fingerprint": f"0x{header.model_fingerprint:016x}",
            "window_size": header.window_size,
            "precision_bits": header.precision_bits,
            "token_count": header.token_count,
            "original_byte_len": header.original_byte_len,
            "digest": f"0x{header.digest:016x}",
            "windows": int(bitlens.size),
            "payload_bytes": len(payload),
        }, indent=2))
        return EXIT_OK
    if path.endswith(".json"):
        manifest = load_manifest(path)
        print(json.dumps({
            "kind": "manifest",
            "entries": [{"name": e.name, "path": e.path, "element_count": e.element_count}
                        for e in manifest.entries],
        }, indent=2))
        return EXIT_OK
    blob = load_blob(path)
    values = blob.floats()
    finite = values[np.isfinite(values)]
    print(json.dumps({
        "kind": "blob",
        "bytes": len(blob.data),
        "element_count": blob.element_count,
        "nan_count": int(np.isnan(values).sum()),
        "zero_fraction": float((values == 0).mean()) if values.size else 0.0,
        "abs_mean": float(np.abs(finite).mean()) if finite.size else None,
    }, indent=2))
    if args.dump_text:
        scheme = parse_scheme(args.scheme)
        text = serialize(blob.data[: args.limit], scheme).to_text()
        print(text)
    return EXIT_OK


_COMMANDS = {
    "compress": _cmd_compress,
    "decompress": _cmd_decompress,
    "bench": _cmd_bench,
    "synth": _cmd_synth,
    "inspect": _cmd_inspect,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BridgeUnavailableError as exc:
        print(f"bridge unavailable: {exc}", file=sys.stderr)
        return EXIT_BRIDGE
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
