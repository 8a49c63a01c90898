"""Image-directory to embedding-file extraction with pluggable backbones."""

from .extract import (
    BackboneSpec,
    ExtractorError,
    extract,
    list_images,
    register_backbone,
    sample_pairs_manifest,
)

__version__ = "0.1.0"

__all__ = [
    "BackboneSpec",
    "ExtractorError",
    "extract",
    "list_images",
    "register_backbone",
    "sample_pairs_manifest",
]
