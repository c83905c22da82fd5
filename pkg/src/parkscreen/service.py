"""HTTP inference service consumed by the drawing UI.

Endpoints:
  POST /api/v1/predict  multipart fields `spiral`, `wave` (send either
                        or both) -> fused verdict JSON
  GET  /api/v1/health   liveness + loaded model versions
  GET  /api/v1/models   full manifest of each loaded bundle

Responses are rendered through one canonical serializer, also used by
the CLI `predict` command, so the two produce byte-identical JSON for
identical inputs. The service is stateless: both bundles are loaded
once at startup and shared read-only across requests.
"""

import json

from fastapi import FastAPI, File, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware

from .errors import ImageDecodeError
from .inference import fuse, load_bundle

MAX_IMAGE_BYTES = 5 * 1024 * 1024
JSON_MEDIA = "application/json"


def canonical_json(obj):
    """Stable byte rendering shared by the service and the CLI."""
    return json.dumps(obj, separators=(",", ":"), sort_keys=False).encode()


def fusion_payload(result, model_versions):
    """PredictResponse object for a FusionResult."""
    per_model = {}
    if result.spiral is not None:
        per_model["spiral"] = result.spiral.probs()
    if result.wave is not None:
        per_model["wave"] = result.wave.probs()
    return {
        "label": result.label,
        "confidence": result.confidence,
        "winning_source": result.winning_source,
        "per_model": per_model,
        "model_versions": dict(sorted(model_versions.items())),
    }


def _error_response(status, code, message):
    body = canonical_json({"error": {"code": code, "message": message}})
    return Response(content=body, status_code=status, media_type=JSON_MEDIA)


def create_app(spiral_bundle_path, wave_bundle_path, cors_origins=None):
    """Load both bundles and build the ASGI app; bad bundles refuse here."""
    bundles = {
        "spiral": load_bundle(spiral_bundle_path),
        "wave": load_bundle(wave_bundle_path),
    }
    versions = {name: b.run_id for name, b in bundles.items()}

    app = FastAPI(title="parkscreen", docs_url=None, redoc_url=None)
    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    @app.get("/api/v1/health")
    def health():
        return Response(
            content=canonical_json({"status": "ok", "models": versions}),
            media_type=JSON_MEDIA)

    @app.get("/api/v1/models")
    def models():
        manifests = {name: b.manifest for name, b in sorted(bundles.items())}
        return Response(content=canonical_json(manifests),
                        media_type=JSON_MEDIA)

    @app.post("/api/v1/predict")
    async def predict(spiral: UploadFile = File(None),
                      wave: UploadFile = File(None)):
        uploads = {"spiral": spiral, "wave": wave}
        if all(f is None for f in uploads.values()):
            return _error_response(
                400, "missing_images",
                "provide at least one of the multipart fields "
                "'spiral' and 'wave'")
        predictions = {}
        for name, upload in uploads.items():
            if upload is None:
                continue
            data = await upload.read()
            if len(data) > MAX_IMAGE_BYTES:
                return _error_response(
                    413, "image_too_large",
                    f"field '{name}' exceeds {MAX_IMAGE_BYTES} bytes")
            try:
                predictions[name] = bundles[name].predict(data)
            except ImageDecodeError:
                return _error_response(
                    400, "undecodable_image",
                    f"field '{name}' is not a readable PNG/JPEG image")
        result = fuse(spiral=predictions.get("spiral"),
                      wave=predictions.get("wave"))
        return Response(content=canonical_json(
            fusion_payload(result, versions)), media_type=JSON_MEDIA)

    return app
