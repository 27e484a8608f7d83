"""
Numerical modules for radial Klein-Gordon boundary stabilization
"""
