"""Tests for Talos Telemetry."""
