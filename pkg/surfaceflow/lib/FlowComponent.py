# -*- coding: utf-8 -*-
# Generic/Built-in
from collections import OrderedDict
from threading import Lock

import logging

# Cached resources kept per component before the least recently used goes
CACHE_LIMIT = 32


class FlowComponent(object):

    def __init__(self, cache_limit=CACHE_LIMIT):
        # Shared plumbing for the numerical components:
        # a module logger and a lock guarding lazily built resources
        # (factorizations, eigenpairs) that concurrent runs may request
        self._log = logging.getLogger(self.__class__.__module__)
        self.lock = Lock()
        self.cache_limit = int(cache_limit)
        self._cache = OrderedDict()

    def set_logging_level(self, level):
        self._log.setLevel(level)

    def cached(self, key, build):
        # Built once per key under the lock; least recently used entries are
        # evicted past cache_limit
        with self.lock:
            value = self._cache.get(key)
            if value is None:
                self._log.debug("building cached resource {}".format(key))
                value = build()
                self._cache[key] = value
            self._cache.move_to_end(key)
            while len(self._cache) > self.cache_limit:
                evicted, _ = self._cache.popitem(last=False)
                self._log.debug("evicted cached resource {}".format(evicted))
            return value

    def cache_size(self):
        with self.lock:
            return len(self._cache)

    def clear_cache(self):
        with self.lock:
            self._cache = OrderedDict()
