"""Mock-3D compositing: reflection, refraction and Fresnel blending
driven by 2D shape maps instead of scene geometry."""

from .compositor import (
    CompositeParams,
    LayerStack,
    StackLayer,
    classic_blend,
    composite,
    composite_pixel,
    composite_stack,
    params_from_json,
    params_to_json,
)
from .imagebuf import (
    BlurPyramid,
    EdgeMode,
    RasterImage,
    build_pyramid,
    linear_to_srgb,
    png_bytes,
    read_png,
    sample_bilinear,
    sample_blurred,
    srgb_to_linear,
    write_png,
)
from .optics import FresnelCurve, OpticsParams, a_from_eta, fresnel
from .shapemap import (
    ShapeMap,
    curl_diagnostic,
    decode_shape_map,
    encode_shape_map,
    gen_flat_map,
    gen_rotation_map,
    gen_sphere_map,
    incident_t,
    load_shape_map,
    normal_z,
    save_shape_map,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "RasterImage", "EdgeMode", "BlurPyramid",
    "srgb_to_linear", "linear_to_srgb",
    "sample_bilinear", "sample_blurred", "build_pyramid",
    "read_png", "write_png", "png_bytes",
    "ShapeMap", "decode_shape_map", "encode_shape_map",
    "load_shape_map", "save_shape_map",
    "normal_z", "incident_t", "curl_diagnostic",
    "gen_flat_map", "gen_sphere_map", "gen_rotation_map",
    "FresnelCurve", "OpticsParams", "a_from_eta", "fresnel",
    "CompositeParams", "StackLayer", "LayerStack",
    "composite", "composite_pixel", "composite_stack", "classic_blend",
    "params_to_json", "params_from_json",
]
