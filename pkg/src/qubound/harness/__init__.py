"""Random instance generation, fuzz campaigns, tightness sweeps and the CLI."""
