"""DriVerse trajectory control core: tokens, anchors, windows, latent alignment and GAE."""

__version__ = "1.0.0"
