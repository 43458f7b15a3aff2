from __future__ import annotations

from hypothesis import HealthCheck, settings

settings.register_profile(
    "fbreg",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("fbreg")
