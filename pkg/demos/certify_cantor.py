"""Estimate a Frostman constant for the Cantor measure and certify the premeasure bound."""
import math

from frostman_kit.frostman import FrostmanHypothesis, certify_teor1, estimate_constant
from frostman_kit.gauge import GaugeFunction
from frostman_kit.measures import RadialProfile, cantor_cloud, generate_example

ALPHA = math.log(2) / math.log(3)

mu = generate_example("cantor", level=6)
A = cantor_cloud(6)
profile = RadialProfile("plateau")
K = estimate_constant(mu, profile, ALPHA, GaugeFunction.power(1.0), seed=0, iterations=2000,
                      r_min=A.resolution)
print(f"adversarial constant K = {K:.4f}")

hyp = FrostmanHypothesis(profile, ALPHA, GaugeFunction.power(1.0), K)
cert = certify_teor1(mu, A, ALPHA, 0.1, hyp, seed=0)
print(f"valid: {cert.valid}  slack: {cert.slack:.3f}")
for key, value in sorted(cert.constants.items()):
    if isinstance(value, float):
        print(f"  {key} = {value:.6g}")
