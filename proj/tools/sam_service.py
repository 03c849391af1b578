"""HTTP adapter exposing a Segment Anything predictor to kpsam_cli.

POST <endpoint> with {"image_path", "points": [{"x", "y", "label"}], "mask_path"?}
returns {"mask_path", "score"}. The highest-scoring of the predictor's candidate masks is
written as an 8-bit PNG under --work-dir.

    pip install git+https://github.com/facebookresearch/segment-anything.git
    python3 tools/sam_service.py --checkpoint sam_vit_h_4b8939.pth --model vit_h
"""

import argparse
import itertools
import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import cv2
import numpy as np


def mask_to_logits(mask, size=256, scale=20.0):
    """Probability mask at image size -> low-resolution logits in the predictor's frame
    (longest side scaled to `size`, padded at the bottom and right)."""
    h, w = mask.shape
    k = size / max(h, w)
    nh, nw = max(1, int(h * k + 0.5)), max(1, int(w * k + 0.5))
    small = cv2.resize(mask.astype(np.float32), (nw, nh), interpolation=cv2.INTER_LINEAR)
    logits = np.full((size, size), -scale / 2, dtype=np.float32)
    logits[:nh, :nw] = (small - 0.5) * scale
    return logits[None, :, :]


class Segmenter:
    def __init__(self, checkpoint, model, device):
        from segment_anything import SamPredictor, sam_model_registry

        sam = sam_model_registry[model](checkpoint=checkpoint)
        sam.to(device)
        sam.eval()
        self.predictor = SamPredictor(sam)
        self.current = None
        self.lock = threading.Lock()

    def __call__(self, image_path, points, labels, mask_prompt):
        with self.lock:
            if self.current != image_path:
                bgr = cv2.imread(image_path, cv2.IMREAD_COLOR)
                if bgr is None:
                    raise ValueError(f"cannot read {image_path}")
                self.predictor.set_image(cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB))
                self.current = image_path
            masks, scores, _ = self.predictor.predict(
                point_coords=points, point_labels=labels, mask_input=mask_prompt, multimask_output=True)
        best = int(np.argmax(scores))
        return masks[best], float(scores[best])


def make_handler(segmenter, endpoint, work_dir):
    counter = itertools.count()

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            if self.path != endpoint:
                self.send_error(404)
                return
            try:
                req = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                pts = np.array([[p["x"], p["y"]] for p in req["points"]], dtype=np.float32)
                labels = np.array([p["label"] for p in req["points"]], dtype=np.int32)
                mask_prompt = None
                if req.get("mask_path"):
                    prev = cv2.imread(req["mask_path"], cv2.IMREAD_GRAYSCALE)
                    mask_prompt = mask_to_logits(prev / 255.0)
                mask, score = segmenter(req["image_path"], pts if len(pts) else None,
                                        labels if len(pts) else None, mask_prompt)
                out = os.path.abspath(os.path.join(work_dir, f"sam_{next(counter)}.png"))
                cv2.imwrite(out, mask.astype(np.uint8) * 255)
                body = json.dumps({"mask_path": out, "score": score}).encode()
                self.send_response(200)
            except Exception as e:  # reported to the client as a 500
                body = json.dumps({"error": str(e)}).encode()
                self.send_response(500)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--checkpoint", required=True)
    ap.add_argument("--model", default="vit_h")
    ap.add_argument("--device", default="cuda")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8765)
    ap.add_argument("--endpoint", default="/segment")
    ap.add_argument("--work-dir", default="sam_io")
    args = ap.parse_args()
    os.makedirs(args.work_dir, exist_ok=True)
    segmenter = Segmenter(args.checkpoint, args.model, args.device)
    server = ThreadingHTTPServer((args.host, args.port), make_handler(segmenter, args.endpoint, args.work_dir))
    print(f"serving on http://{args.host}:{args.port}{args.endpoint}")
    server.serve_forever()


if __name__ == "__main__":
    main()
