# Copyright (C) 2026 The cslayout Authors
# SPDX-License-Identifier: Apache-2.0
#
# End-to-end checks of the cslayout binary: exit codes, output files, the
# HTTP service and schema conformance of every JSON payload.

import base64
import csv
import json
import os
import pathlib
import re
import signal
import socket
import subprocess
import tempfile
import time
import unittest
import urllib.error
import urllib.request

import jsonschema
import referencing

BIN = os.environ.get("CSLAYOUT_BIN", "cslayout")
SCHEMAS = pathlib.Path(os.environ.get("CSLAYOUT_SCHEMAS", pathlib.Path(__file__).parents[2] / "schemas"))

EXIT_USAGE, EXIT_DATA = 1, 2


def load_registry():
    resources = []
    for path in SCHEMAS.glob("*.schema.json"):
        schema = json.loads(path.read_text())
        resources.append((schema["$id"], referencing.Resource.from_contents(schema)))
    return referencing.Registry().with_resources(resources)


REGISTRY = load_registry()


def validate(payload, name):
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(payload)


def run(*args, env=None, timeout=300):
    return subprocess.run([BIN, *args], capture_output=True, text=True, env=env, timeout=timeout)


class Server:
    """`cslayout serve` on a kernel-chosen port."""

    def __init__(self, *args):
        self.proc = subprocess.Popen([BIN, "serve", "--port", "0", *args], stderr=subprocess.PIPE, text=True)
        self.port = None
        deadline = time.time() + 30
        while time.time() < deadline:
            line = self.proc.stderr.readline()
            if not line:
                break
            m = re.search(r"listening on [^:]+:(\d+)", line)
            if m:
                self.port = int(m.group(1))
                break
        if self.port is None:
            self.proc.kill()
            raise RuntimeError("server did not report a port")

    def url(self, path):
        return f"http://127.0.0.1:{self.port}{path}"

    def request(self, path, body=None):
        data = None if body is None else json.dumps(body).encode()
        req = urllib.request.Request(self.url(path), data=data, method="POST" if data is not None else "GET")
        if data is not None:
            req.add_header("Content-Type", "application/json")
        try:
            with urllib.request.urlopen(req, timeout=30) as resp:
                return resp.status, resp.headers.get("Content-Type"), resp.read()
        except urllib.error.HTTPError as e:
            return e.code, e.headers.get("Content-Type"), e.read()

    def terminate(self):
        self.proc.send_signal(signal.SIGTERM)
        code = self.proc.wait(timeout=5)
        self.proc.stderr.close()
        return code


class CliTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = pathlib.Path(cls.tmp.name)
        cls.corpus = cls.dir / "corpus"
        cls.ckpt = cls.dir / "model.ckpt"
        r = run("fixtures", "--n", "8", "--seed", "3", "--out", str(cls.corpus))
        assert r.returncode == 0, r.stderr
        r = run("train", "--corpus", str(cls.corpus), "--out", str(cls.ckpt), "--steps", "3", "--batch", "4",
                "--log-every", "1")
        assert r.returncode == 0, r.stderr

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_train_writes_checkpoint_and_loss_csv(self):
        self.assertTrue(self.ckpt.exists())
        rows = list(csv.reader(pathlib.Path(str(self.ckpt) + ".loss.csv").read_text().splitlines()))
        self.assertEqual(rows[0], ["step", "L_D", "L_G", "L_trans1", "L_trans2", "L_size"])
        self.assertEqual([r[0] for r in rows[1:]], ["0", "1", "2"])

    def test_zero_learning_rate_gives_constant_losses(self):
        out = self.dir / "lr0.ckpt"
        r = run("train", "--fixture", "4", "--out", str(out), "--steps", "4", "--batch", "8", "--lr", "0")
        self.assertEqual(r.returncode, 0, r.stderr)
        rows = list(csv.reader(pathlib.Path(str(out) + ".loss.csv").read_text().splitlines()))[1:]
        self.assertEqual(len(rows), 4)
        for row in rows:
            self.assertEqual(row[1:], rows[0][1:])

    def test_training_is_deterministic(self):
        csvs = []
        for name in ("a", "b"):
            out = self.dir / f"det_{name}.ckpt"
            r = run("train", "--fixture", "4", "--out", str(out), "--steps", "3", "--batch", "2", "--seed", "5")
            self.assertEqual(r.returncode, 0, r.stderr)
            csvs.append(pathlib.Path(str(out) + ".loss.csv").read_bytes())
        self.assertEqual(csvs[0], csvs[1])

    def test_missing_inputs_exit_with_data_error(self):
        r = run("train", "--corpus", str(self.dir / "absent"), "--out", str(self.dir / "x.ckpt"))
        self.assertEqual(r.returncode, EXIT_DATA)
        self.assertIn("absent", r.stderr)
        r = run("eval", "--corpus", str(self.corpus), "--ckpt", str(self.dir / "absent.ckpt"))
        self.assertEqual(r.returncode, EXIT_DATA)
        self.assertIn("absent.ckpt", r.stderr)
        garbage = self.dir / "garbage.ckpt"
        garbage.write_bytes(b"not a checkpoint")
        r = run("eval", "--corpus", str(self.corpus), "--ckpt", str(garbage))
        self.assertEqual(r.returncode, EXIT_DATA)

    def test_usage_errors(self):
        self.assertEqual(run().returncode, EXIT_USAGE)
        self.assertEqual(run("train").returncode, EXIT_USAGE)
        self.assertEqual(run("frobnicate").returncode, EXIT_USAGE)
        self.assertEqual(run("--log-level", "loud", "fixtures", "--out", str(self.dir / "f")).returncode, EXIT_USAGE)
        self.assertEqual(run("eval", "--corpus", str(self.corpus)).returncode, EXIT_USAGE)
        self.assertEqual(run("eval", "--corpus", str(self.corpus), "--oracle", "--random").returncode, EXIT_USAGE)
        self.assertEqual(run("train", "--fixture", "2", "--out", str(self.dir / "n.ckpt"), "--lr", "-1").returncode,
                         EXIT_USAGE)
        self.assertEqual(run("serve").returncode, EXIT_USAGE)
        self.assertEqual(run("--help").returncode, 0)

    def test_eval_oracle_and_reports_validate(self):
        report = self.dir / "oracle.json"
        r = run("eval", "--corpus", str(self.corpus), "--oracle", "--out", str(report))
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertIn("overall", r.stdout)
        j = json.loads(report.read_text())
        validate(j, "eval_report")
        for key in ("mode", "mean_iou", "transfer", "size"):
            self.assertEqual(j["overall"][key]["value"], 1.0)
        for extra in (["--random"], ["--ckpt", str(self.ckpt)]):
            out = self.dir / "report.json"
            r = run("eval", "--corpus", str(self.corpus), *extra, "--out", str(out))
            self.assertEqual(r.returncode, 0, r.stderr)
            validate(json.loads(out.read_text()), "eval_report")

    def test_render(self):
        scene = sorted(self.corpus.rglob("*.rec"))[0]
        out = self.dir / "scene.png"
        r = run("render", "--scene", str(scene), "--out", str(out), "--size", "64x96")
        self.assertEqual(r.returncode, 0, r.stderr)
        data = out.read_bytes()
        self.assertEqual(data[:8], b"\x89PNG\r\n\x1a\n")
        self.assertEqual(int.from_bytes(data[16:20], "big"), 96)  # IHDR width
        self.assertEqual(int.from_bytes(data[20:24], "big"), 64)
        self.assertEqual(run("render", "--scene", str(scene), "--out", str(out), "--size", "big").returncode,
                         EXIT_USAGE)
        self.assertEqual(run("render", "--scene", str(self.dir / "absent.json"), "--out", str(out)).returncode,
                         EXIT_DATA)

    def test_serve_endpoints_and_shutdown(self):
        server = Server("--ckpt", str(self.ckpt), "--fixtures", str(self.corpus))
        try:
            status, _, body = server.request("/healthz")
            self.assertEqual(status, 200)
            health = json.loads(body)
            validate(health, "healthz")
            self.assertEqual(health["checkpoint_hash"],
                             subprocess.run(["sha256sum", str(self.ckpt)], capture_output=True,
                                            text=True).stdout.split()[0])

            status, _, body = server.request("/api/v1/catalog")
            self.assertEqual(status, 200)
            catalog = json.loads(body)
            validate(catalog, "catalog")

            status, _, body = server.request("/api/v1/scenes")
            self.assertEqual(status, 200)
            scenes = json.loads(body)
            validate(scenes, "scenes")
            self.assertEqual(len(scenes["scenes"]), 8)
            status, ctype, png = server.request(scenes["scenes"][0]["thumbnail"])
            self.assertEqual((status, ctype), (200, "image/png"))
            self.assertEqual(png[:4], b"\x89PNG")

            custom = next(c for c in catalog["categories"] if c["customized"])
            req = {"scene_id": scenes["scenes"][0]["id"],
                   "requests": [{"category": custom["id"], "size_code": "WidthRight"}], "render": True}
            validate(req, "layout_request")
            payloads = []
            for _ in range(2):
                status, _, body = server.request("/api/v1/layout", req)
                self.assertEqual(status, 200, body)
                resp = json.loads(body)
                validate(resp, "layout_response")
                self.assertEqual(base64.b64decode(resp["image"])[:4], b"\x89PNG")
                payloads.append(json.dumps(resp["layout"], sort_keys=True))
            self.assertEqual(payloads[0], payloads[1])

            bad = dict(req, requests=[{"category": custom["id"], "size_code": "HeightUp"}])
            status, _, body = server.request("/api/v1/layout", bad)
            self.assertEqual(status, 400)
            validate(json.loads(body), "error")
            status, _, body = server.request("/api/v1/layout", {"scene_id": "nope"})
            self.assertEqual(status, 404)
            validate(json.loads(body), "error")

            # The port is taken while the first server runs.
            clash = run("serve", "--ckpt", str(self.ckpt), "--port", str(server.port), timeout=30)
            self.assertNotEqual(clash.returncode, 0)
        finally:
            start = time.time()
            code = server.terminate()
        self.assertEqual(code, 0)
        self.assertLess(time.time() - start, 5.0)

    def test_serve_without_model_file_fails(self):
        r = run("serve", "--ckpt", str(self.dir / "absent.ckpt"), "--port", "0", timeout=30)
        self.assertEqual(r.returncode, EXIT_DATA)

    def test_serve_reads_model_path_from_environment(self):
        env = dict(os.environ, MODEL_PATH=str(self.ckpt))
        proc = subprocess.Popen([BIN, "serve", "--port", "0"], env=env, stderr=subprocess.PIPE, text=True)
        try:
            line = ""
            deadline = time.time() + 30
            while "listening" not in line and time.time() < deadline:
                line = proc.stderr.readline()
                if not line:
                    break
            self.assertIn("listening", line)
        finally:
            proc.send_signal(signal.SIGINT)
            self.assertEqual(proc.wait(timeout=5), 0)
            proc.stderr.close()


if __name__ == "__main__":
    unittest.main(verbosity=2)
