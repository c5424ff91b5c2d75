"""Configuration, exceptions and run bookkeeping"""
