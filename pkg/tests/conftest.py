from hypothesis import HealthCheck, settings

# Single-CPU CI-style box: wall-clock per-example deadlines only add noise.
settings.register_profile(
    "ci", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ci")
