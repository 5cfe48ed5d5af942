"""Unit test package for edgecsp."""
