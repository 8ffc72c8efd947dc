"""Stateless HTTP compositing service.

Clients upload PNG assets (content-addressed by SHA-256, held in a
bounded in-memory cache), then request composites by asset id.  A
composite request without ``previewMaxDim`` returns bytes identical to
the command-line interface run on the same inputs; with it, inputs are
downscaled first so interactive previews stay fast.

Run with ``python -m shapecomp.service [--host H] [--port P]``; the
port can also come from the SHAPECOMP_PORT environment variable.
"""

from __future__ import annotations

import hashlib
import threading
from collections import OrderedDict
from typing import Optional

import click
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .compositor import (
    BLEND_OPS,
    CLASSIC_OPS,
    CompositeParams,
    composite,
    params_from_json,
    params_to_json,
)
from .imagebuf import RasterImage, png_bytes, read_png, resize
from .shapemap import (
    derive_d_from_z,
    gen_flat_map,
    gen_rotation_map,
    gen_sphere_map,
    load_shape_map,
    resize_shape_map,
    shape_map_png_bytes,
)

MAX_UPLOAD_BYTES = 32 * 1024 * 1024
CACHE_BYTES = 256 * 1024 * 1024
DEFAULT_PREVIEW_MAX_DIM = 512
MAX_FIXTURE_SIZE = 2048
FIXTURE_KINDS = ("flat", "sphere", "rotation")


class AssetStore:
    """Content-addressed byte store with least-recently-used eviction."""

    def __init__(self, capacity_bytes: int = CACHE_BYTES):
        self._capacity = capacity_bytes
        self._lock = threading.Lock()
        self._assets: OrderedDict[str, bytes] = OrderedDict()
        self._total = 0

    def put(self, raw: bytes) -> str:
        asset_id = hashlib.sha256(raw).hexdigest()
        with self._lock:
            if asset_id in self._assets:
                self._assets.move_to_end(asset_id)
                return asset_id
            self._assets[asset_id] = raw
            self._total += len(raw)
            while self._total > self._capacity and len(self._assets) > 1:
                _, evicted = self._assets.popitem(last=False)
                self._total -= len(evicted)
        return asset_id

    def get(self, asset_id: str) -> Optional[bytes]:
        with self._lock:
            raw = self._assets.get(asset_id)
            if raw is not None:
                self._assets.move_to_end(asset_id)
            return raw


class CompositeRequest(BaseModel):
    shape: str
    bg: str
    fg: Optional[str] = None
    env: Optional[str] = None
    params: Optional[dict] = None
    shapeSrgb: bool = False
    dFromZ: bool = False
    previewMaxDim: Optional[int] = None


def _preview_size(width: int, height: int, max_dim: int) -> tuple[int, int]:
    scale = max_dim / max(width, height)
    if scale >= 1.0:
        return width, height
    return max(1, round(width * scale)), max(1, round(height * scale))


def create_app(max_upload_bytes: int = MAX_UPLOAD_BYTES,
               cache_bytes: int = CACHE_BYTES) -> FastAPI:
    app = FastAPI(title="shapecomp", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])
    store = AssetStore(cache_bytes)
    app.state.assets = store

    def _fetch_bytes(asset_id: str, field: str) -> bytes:
        raw = store.get(asset_id)
        if raw is None:
            raise HTTPException(404, detail=f"unknown asset {asset_id} for {field}")
        return raw

    def _fetch_image(asset_id: Optional[str], field: str) -> Optional[RasterImage]:
        if asset_id is None:
            return None
        return read_png(_fetch_bytes(asset_id, field))

    @app.post("/assets")
    async def upload_asset(request: Request):
        raw = await request.body()
        if len(raw) > max_upload_bytes:
            raise HTTPException(413, detail=f"asset exceeds {max_upload_bytes} bytes")
        if len(raw) == 0:
            raise HTTPException(400, detail="empty request body")
        try:
            img = read_png(raw)
        except Exception:
            raise HTTPException(400, detail="body is not a decodable PNG") from None
        asset_id = store.put(raw)
        return {"id": asset_id, "width": img.width, "height": img.height}

    @app.post("/composite")
    def run_composite(req: CompositeRequest):
        try:
            p = params_from_json(req.params)
        except ValueError as exc:
            raise HTTPException(422, detail=str(exc)) from None

        shape_raw = _fetch_bytes(req.shape, "shape")
        try:
            sm = load_shape_map(shape_raw, srgb=req.shapeSrgb)
        except ValueError as exc:
            raise HTTPException(422, detail=f"shape: {exc}") from None
        if req.dFromZ:
            sm = derive_d_from_z(sm, p.optics.w)
        fg = _fetch_image(req.fg, "fg")
        bg = _fetch_image(req.bg, "bg")
        env = _fetch_image(req.env, "env")

        if req.previewMaxDim is not None:
            if req.previewMaxDim < 1:
                raise HTTPException(422, detail="previewMaxDim: must be >= 1")
            new_w, new_h = _preview_size(sm.width, sm.height, req.previewMaxDim)
            if (new_w, new_h) != (sm.width, sm.height):
                sm = resize_shape_map(sm, new_w, new_h)
                bg = resize(bg, new_w, new_h)
                if fg is not None:
                    fg = resize(fg, new_w, new_h)
            if env is not None and max(env.width, env.height) > req.previewMaxDim:
                env = resize(env, *_preview_size(env.width, env.height,
                                                 req.previewMaxDim))

        try:
            out = composite(sm, fg, bg, env, p)
        except ValueError as exc:
            raise HTTPException(422, detail=str(exc)) from None
        return Response(content=png_bytes(out), media_type="image/png")

    @app.get("/defaults")
    def defaults():
        return {
            "params": params_to_json(CompositeParams()),
            "previewMaxDim": DEFAULT_PREVIEW_MAX_DIM,
            "maxUploadBytes": max_upload_bytes,
            "blendOps": list(BLEND_OPS),
            "classicOps": list(CLASSIC_OPS),
            "fixtureKinds": list(FIXTURE_KINDS),
        }

    @app.get("/fixtures")
    def fixtures():
        return {"kinds": list(FIXTURE_KINDS), "maxSize": MAX_FIXTURE_SIZE}

    @app.get("/fixtures/{kind}")
    def fixture(kind: str, size: int = 256, radius: float = 1.0,
                thickness_scale: float = 1.0):
        if kind not in FIXTURE_KINDS:
            raise HTTPException(404, detail=f"unknown fixture kind {kind!r}")
        if not 1 <= size <= MAX_FIXTURE_SIZE:
            raise HTTPException(422, detail=f"size: must lie in [1, {MAX_FIXTURE_SIZE}]")
        try:
            if kind == "flat":
                sm = gen_flat_map(size)
            elif kind == "sphere":
                sm = gen_sphere_map(size, radius=radius,
                                    thickness_scale=thickness_scale)
            else:
                sm = gen_rotation_map(size)
        except ValueError as exc:
            raise HTTPException(422, detail=str(exc)) from None
        return Response(content=shape_map_png_bytes(sm), media_type="image/png")

    return app


app = create_app()


@click.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=None, envvar="SHAPECOMP_PORT",
              help="Listen port (default 8000, or SHAPECOMP_PORT).")
def main(host: str, port: Optional[int]):
    """Serve the compositing API over HTTP."""
    import uvicorn

    uvicorn.run(app, host=host, port=8000 if port is None else port,
                log_level="info")


if __name__ == "__main__":
    main()


__all__ = ["AssetStore", "CompositeRequest", "create_app", "app", "main",
           "MAX_UPLOAD_BYTES", "CACHE_BYTES", "DEFAULT_PREVIEW_MAX_DIM",
           "FIXTURE_KINDS"]
