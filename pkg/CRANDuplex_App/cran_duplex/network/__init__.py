"""
Network Module
RRH deployment, fading draws and per-realization SINR
"""
