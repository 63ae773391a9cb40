from .binary import read_array, read_header, write_array
from .images import emit_image, read_csv_image, read_pgm
from .manifest import read_json, read_manifest, read_model, write_json, write_manifest

__all__ = [
    "read_array",
    "read_header",
    "write_array",
    "emit_image",
    "read_csv_image",
    "read_pgm",
    "read_json",
    "read_manifest",
    "read_model",
    "write_json",
    "write_manifest",
]
