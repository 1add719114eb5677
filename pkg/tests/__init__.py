"""Test suite for gaple-sim"""
