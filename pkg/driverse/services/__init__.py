"""Pure computation services (geometry, trend, anchors, windows, alignment, synth, manifests)."""
