"""
Analysis Module
Integral-form rates with series and closed-form cross-checks
"""
