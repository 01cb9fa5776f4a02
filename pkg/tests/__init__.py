"""Tests for tc-sched."""
