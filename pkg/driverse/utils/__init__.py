"""Shared file-format helpers (PPM frames, JSON documents)."""
