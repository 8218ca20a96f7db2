"""
Analytic and simulation services for G/G/1 queues and Sparre Andersen risk
processes with dependent inter-arrival and service times.
"""
