package com.example.util;

import java.util.Map;
import java.util.HashMap;

public class Pairs<K, V> {
    private final Map<K, V> store = new HashMap<>();

    public <T extends Comparable<T>> T max(T a, T b) {
        return a.compareTo(b) >= 0 ? a : b;
    }

    public V get(K key) {
        return store.get(key);
    }
}
