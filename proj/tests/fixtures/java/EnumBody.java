package com.example.model;

public enum EnumBody {
    PLAIN,
    FANCY(2) {
        @Override
        public int weight() {
            return super.weight() * 2;
        }
    },
    LAST;

    private final int base;

    EnumBody() {
        this(1);
    }

    EnumBody(int base) {
        this.base = base;
    }

    public int weight() {
        return base;
    }
}
