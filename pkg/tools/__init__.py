"""
Configuration parsing and artifact export for scenario runs
"""
