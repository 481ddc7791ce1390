"""
API subpackage for the report endpoints.
"""
