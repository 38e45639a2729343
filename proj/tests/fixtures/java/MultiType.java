package com.example.multi;

public class MultiType {
    void first() {}
}

class Companion {
    void second() {}
}
