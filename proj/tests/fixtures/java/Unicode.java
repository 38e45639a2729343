package com.example.text;

public class Unicode {
    // Grüße — comment with umlauts and an em—dash
    private String greeting = "héllo wörld";

    String greet() {
        return greeting;
    }
}
