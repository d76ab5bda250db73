"""Preference-weighted indoor routing and weight calibration against preferred routes."""
