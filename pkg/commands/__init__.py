"""Модули команд CLI; каждая команда предоставляет функцию start(run_config)."""
