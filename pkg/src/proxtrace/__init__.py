"""Bluetooth-proximity platform for institutional deployments.

Subpackages and modules:

- ``wire``: binary contact-batch codec, request signing, beacon id embedding
- ``identity``: invite codes, device registration, reinstalls, OTP consent
- ``ingest``: authenticated telemetry endpoints and append-only raw stores
- ``tempgraph``: temporal interval graphs and time-respecting reachability
- ``analytics``: distancing scores, contact buckets, alerts, heatmaps
- ``rssi``: empirical signal-strength distributions and threshold calibration
- ``tracing``: consent-gated contact-trace workflow
- ``simfleet``: agent-based device fleet simulator
- ``platform``: composition root wiring the services over one data directory
- ``server``: HTTP adapter exposing the device, analytics, and routing APIs
"""

__version__ = "0.1.0"
