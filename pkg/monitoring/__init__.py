"""
Resource monitoring.
"""
from monitoring.resources import ResourceMonitor, ResourceUsage, get_monitor

__all__ = [
    "ResourceMonitor",
    "ResourceUsage",
    "get_monitor",
]
