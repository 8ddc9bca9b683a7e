"""Tests for marq"""
