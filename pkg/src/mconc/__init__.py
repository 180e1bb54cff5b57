"""Generalized multipartite concurrences."""
