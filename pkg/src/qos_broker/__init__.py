"""
QoS Broker - a cloud service broker for SaaS offerings.

Ranks competing offerings against consumer requirements with an aggregate
utility function, negotiates SLAs with ranked providers, and monitors SLA
compliance from ingested measurements.
"""

__version__ = "0.1.0"
