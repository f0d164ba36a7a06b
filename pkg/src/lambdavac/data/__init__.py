"""Catalog solution files (``.metric``)."""
