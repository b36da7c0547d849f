import hypothesis

# numba-compiled kernels and big-int loops make per-example deadlines noisy
hypothesis.settings.register_profile(
    "pkg", deadline=None, max_examples=60, derandomize=True
)
hypothesis.settings.load_profile("pkg")
