"""
hspliable modules package
Horseshoe pliable lasso: Gibbs samplers, simulation and benchmark harness
"""
__version__ = '1.0.0'
