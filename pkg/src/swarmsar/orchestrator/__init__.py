"""Batch harness, remote reasoner client, HTTP gateway and CLI."""
