"""Rate regions, coding bounds and exact simulation for a two-transmitter
wiretap setting with a cognitive sender."""

__version__ = "0.1.0"
