"""
Commands package - one click command per analysis workflow
"""
