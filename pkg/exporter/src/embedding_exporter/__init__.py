"""Offline embedding export to KNEM files.

The captioning pipeline consumes embedding matrices through the KNEM
binary format and nothing else; this package produces those files from
real pretrained encoders (or any object satisfying the small encoder
protocol) without sharing any code with the consumer.
"""

from .encoders import available_encoders, load_encoder
from .errors import CorruptInput, EncoderLoadError, ExporterError
from .export import ExportJob, ExportResult, export_embeddings, ids_sidecar_path
from .knem import write_knem
from .manifest import ManifestEntry, load_manifest

__all__ = [
    "available_encoders",
    "load_encoder",
    "CorruptInput",
    "EncoderLoadError",
    "ExporterError",
    "ExportJob",
    "ExportResult",
    "export_embeddings",
    "ids_sidecar_path",
    "write_knem",
    "ManifestEntry",
    "load_manifest",
]
