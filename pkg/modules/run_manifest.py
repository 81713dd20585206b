"""
Run manifest generation
"""
import hashlib
import json
import logging
import os
import platform
import sys
from typing import Dict, Iterable, Optional

import numpy as np

from modules import __version__
from modules.file_manager import calculate_sha256, write_json
from modules.utils import generate_run_id, get_timestamp

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'


def _hash_files(paths: Iterable[str], root: Optional[str] = None) -> Dict[str, str]:
    hashes = {}
    for path in sorted(set(p for p in paths if p)):
        key = os.path.relpath(path, root) if root else path
        hashes[key] = calculate_sha256(path)
    return hashes


def generate_manifest(command: str, effective_config: dict, inputs: Iterable[str],
                      outputs: Iterable[str], out_dir: Optional[str] = None,
                      extra: Optional[dict] = None) -> dict:
    """
    Create manifest with run_id, timestamp, config, input/output hashes, system_info, manifest_hash

    Args:
        command: Subcommand that produced the outputs
        effective_config: Merged RunConfig as a dict
        inputs: Input file paths (hashed)
        outputs: Output file paths (hashed, relative to out_dir)
        out_dir: Output directory
        extra: Command-specific fields (e.g. repro verdicts)

    Returns:
        dict: Manifest dictionary
    """
    manifest = {
        "run_id": generate_run_id(),
        "timestamp": get_timestamp(),
        "command": command,
        "config": effective_config,
        "inputs": _hash_files(inputs),
        "outputs": _hash_files(outputs, out_dir),
        "system_info": {
            "python_version": sys.version.split()[0],
            "numpy_version": np.__version__,
            "platform": platform.platform(),
            "app_version": __version__,
        },
    }
    if extra:
        manifest.update(extra)

    # Calculate manifest hash (excluding the hash field itself)
    manifest["manifest_hash"] = calculate_manifest_hash(manifest)
    return manifest


def save_manifest(manifest: dict, out_dir: str) -> str:
    """
    Save manifest as out_dir/manifest.json

    Returns:
        str: Path written
    """
    path = os.path.join(out_dir, MANIFEST_NAME)
    write_json(manifest, path)
    logger.info(f"Manifest written: {path}")
    return path


def calculate_manifest_hash(manifest: dict) -> str:
    """
    Calculate SHA256 hash of manifest (excluding the hash field itself)

    Args:
        manifest: Manifest dictionary

    Returns:
        str: SHA256 hash string
    """
    manifest_copy = manifest.copy()
    manifest_copy.pop("manifest_hash", None)

    # Sorted keys for consistent hashing
    manifest_json = json.dumps(manifest_copy, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(manifest_json.encode('utf-8')).hexdigest()


def verify_manifest(manifest: dict) -> bool:
    """True when the stored manifest_hash matches the content."""
    return manifest.get("manifest_hash") == calculate_manifest_hash(manifest)
