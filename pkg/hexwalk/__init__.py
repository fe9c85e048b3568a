"""Случайное блуждание с дискретным временем на гексагональной (графеновой) решётке."""
