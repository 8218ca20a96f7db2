from .wienerhopf_service import FactorizationResult, factorize, idle_lst, idle_tail, waiting_lst

__all__ = ["FactorizationResult", "factorize", "idle_lst", "idle_tail", "waiting_lst"]
