"""
HTTP fitting service
"""
