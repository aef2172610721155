"""
Input parsers
"""
