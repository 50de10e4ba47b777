#!/usr/bin/env python3
"""Configurable test double speaking the line-JSON adapter protocol.

Answers landmarks/embed/project/synthesize requests deterministically
(derived from request content), or misbehaves on purpose via --mode.
"""

import argparse
import hashlib
import json
import os
import sys
import time


def vector_from(text: str, dim: int):
    out = []
    counter = 0
    while len(out) < dim:
        h = hashlib.sha256(f"{text}:{counter}".encode()).digest()
        out.extend((b - 127.5) / 127.5 for b in h)
        counter += 1
    return out[:dim]


def landmark_grid(count: int):
    return [[10.0 + (i % 12) * 4.0, 10.0 + (i // 12) * 4.0] for i in range(count)]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--mode", default="ok",
                        choices=["ok", "error", "garbage", "exit", "hang"])
    parser.add_argument("--landmark-count", type=int, default=68)
    parser.add_argument("--dim", type=int, default=8)
    parser.add_argument("--size", type=int, default=16)
    parser.add_argument("--declare-size", type=int, default=None)
    parser.add_argument("--space", default="W")
    parser.add_argument("--exit-code", type=int, default=3)
    args = parser.parse_args()

    if args.mode == "exit":
        return args.exit_code

    for line in sys.stdin:
        if args.mode == "hang":
            time.sleep(300)
        if args.mode == "garbage":
            print("this is not json")
            sys.stdout.flush()
            continue
        if args.mode == "error":
            print(json.dumps({"error": "stub refuses"}))
            sys.stdout.flush()
            continue
        try:
            req = json.loads(line)
            op = req.get("op")
            if op == "landmarks":
                if "fail" in os.path.basename(str(req.get("image", ""))):
                    resp = {"error": "detector found no face"}
                else:
                    resp = {"points": landmark_grid(args.landmark_count)}
            elif op == "embed":
                resp = {"vector": vector_from(req.get("image", ""), args.dim)}
            elif op == "project":
                key = f"{req.get('image', '')}|{req.get('steps', 0)}"
                resp = {"latent": vector_from(key, args.dim), "space": args.space}
            elif op == "synthesize":
                from PIL import Image

                latent = req.get("latent", [])
                level = int(abs(sum(latent)) * 97) % 256
                size = args.size
                img = Image.new("RGB", (size, size), (level, 255 - level, 128))
                img.save(req["out"], format="PNG")
                declared = args.declare_size or size
                resp = {"ok": True, "width": declared, "height": declared}
            else:
                resp = {"error": f"unknown op {op!r}"}
        except Exception as exc:  # stub must keep serving
            resp = {"error": str(exc)}
        print(json.dumps(resp))
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
